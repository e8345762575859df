//! One function per subcommand. Each validates, computes, writes its files
//! into the output directory and returns a summary.

use std::fs;
use std::path::{Path, PathBuf};

use adiasched_core::bounds::{
    bound_measure_constant, check_power_law_components, eta_components, named_measure_constant, scaling_check_linear,
    theoretical_constants,
};
use adiasched_core::evolve::{default_steps, propagate_with, PropagateOptions};
use adiasched_core::gap::{estimate_measure_constant_with, pl_lower_bound, GapProfile};
use adiasched_core::harness::{FamilyKind, ScheduleKind, SearchOptions};
use adiasched_core::schedule::{
    boundary_cancellation_schedule, exponent_in_range, linear_schedule, power_law_node_residual, synthesize_power_law,
    Schedule,
};
use adiasched_core::variational::{functional, el_full_residual, ELResidualReport};
use serde_json::{json, Value};

use crate::config::{
    defaults, resolved, BoundArgs, ElcheckArgs, EvolveArgs, FamilyArgs, FamilyName, GapArgs, OutputArgs, ScheduleArgs,
    ScheduleCmdArgs, ScheduleName, SweepArgs,
};
use crate::error::{invalid, io_err, CliResult};
use crate::family::{resolve, Problem};
use crate::formats::{
    write_json, write_profile_csv, write_residuals_csv, write_schedule, write_states_json, write_trace_csv, read_schedule,
};
use crate::report::{emit_report, Metadata, SweepReport};
use crate::sweep::{run_sweep, thread_cap, SweepSpec};

/// Result of a command: the JSON summary (printed with `--json`), a short
/// text rendering, and notes for standard error.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Value,
    pub text: String,
    pub warnings: Vec<String>,
}

fn out_dir(out: &OutputArgs) -> CliResult<PathBuf> {
    let dir = out.dir();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

fn file_list(paths: &[&Path]) -> Value {
    Value::Array(paths.iter().map(|p| Value::String(p.display().to_string())).collect())
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> CliResult<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(invalid(format!("--{name} must be at least {min}, got {v}")))
    }
}

fn exponent(args: &ScheduleArgs, warnings: &mut Vec<String>) -> CliResult<f64> {
    let p = args.p.unwrap_or(defaults::P);
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("--p must be positive, got {p}")));
    }
    if !exponent_in_range(p) {
        if !args.allow_p_outside.unwrap_or(false) {
            return Err(invalid(format!("--p {p} is outside (1, 2); pass --allow-p-outside to proceed")));
        }
        warnings.push(format!("p = {p} is outside (1, 2); error-bound constants do not apply"));
    }
    Ok(p)
}

fn schedule_name(args: &ScheduleArgs) -> ScheduleName {
    args.schedule.unwrap_or(ScheduleName::Power)
}

fn needs_profile(args: &ScheduleArgs) -> bool {
    args.schedule_file.is_none() && schedule_name(args) == ScheduleName::Power
}

/// Build or load the schedule described by `args`.
pub fn build_schedule(args: &ScheduleArgs, profile: Option<&GapProfile>, warnings: &mut Vec<String>) -> CliResult<Schedule> {
    if let Some(path) = &args.schedule_file {
        if args.schedule.is_some() || args.p.is_some() {
            return Err(invalid("--schedule-file replaces --schedule and --p"));
        }
        return read_schedule(path);
    }
    let grid = at_least("schedule-grid", args.schedule_grid.unwrap_or(defaults::SCHEDULE_GRID), 2)?;
    Ok(match schedule_name(args) {
        ScheduleName::Power => {
            let p = exponent(args, warnings)?;
            let profile = profile.ok_or_else(|| invalid("a power-law schedule needs a gap profile"))?;
            synthesize_power_law(profile, p, grid)?
        }
        ScheduleName::Linear => linear_schedule(grid)?,
        ScheduleName::Boundary => boundary_cancellation_schedule(grid)?,
    })
}

fn has_problem(args: &FamilyArgs) -> bool {
    args.family.is_some() || args.profile.is_some() || args.profile_file.is_some()
}

pub fn cmd_gap(args: &GapArgs) -> CliResult<Outcome> {
    let problem = resolve(&args.family, false)?;
    let grid = at_least("grid", args.family.grid.unwrap_or(defaults::GRID), 2)?;
    let x_grid = args.x_grid.unwrap_or(defaults::X_GRID);
    let resolution = args.resolution.unwrap_or(defaults::RESOLUTION);
    let dir = out_dir(&args.output)?;
    let meta = Metadata::new("gap", resolved(args));
    let profile_csv = dir.join("profile.csv");
    write_profile_csv(&profile_csv, &problem.profile.tabulate(grid))?;
    let mut files = vec![profile_csv];
    let mut text = format!(
        "{}: min gap {:.9} at u = {:.9}, max gap {:.9}\n",
        problem.label,
        problem.profile.min_gap(),
        problem.profile.argmin(),
        problem.profile.max_gap()
    );
    let mut summary = json!({
        "metadata": meta,
        "problem": problem.info(),
        "max_gap": problem.profile.max_gap(),
    });
    if args.measure.unwrap_or(false) {
        let est = estimate_measure_constant_with(&problem.profile, x_grid, resolution)?;
        let named = named_measure_constant(&problem.profile);
        let doc = json!({
            "metadata": meta,
            "problem": problem.info(),
            "estimate": est,
            "named_constant": named,
        });
        let path = dir.join("measure.json");
        write_json(&path, &doc)?;
        files.push(path);
        text.push_str(&format!("measure constant estimate {:.6} (witness x = {:.6})", est.constant_hat, est.witness_x));
        if let Some(c) = named {
            text.push_str(&format!(", named family constant {c:.6}"));
        }
        text.push('\n');
        summary["measure"] = json!({"estimate": est, "named_constant": named});
    }
    if args.pl.unwrap_or(false) {
        let lb = pl_lower_bound(&problem.profile)?;
        let path = dir.join("pl_bound.csv");
        let knots = if lb.samples().is_empty() { lb.tabulate(grid) } else { lb.samples().to_vec() };
        write_profile_csv(&path, &knots)?;
        files.push(path);
        text.push_str(&format!("piecewise-linear lower bound: {} knots\n", knots.len()));
        summary["pl_knots"] = json!(knots.len());
    }
    let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    summary["files"] = file_list(&refs);
    Ok(Outcome {
        summary,
        text,
        warnings: vec![],
    })
}

fn optional_problem(family: &FamilyArgs, schedule: &ScheduleArgs, need_pair: bool) -> CliResult<Option<Problem>> {
    if need_pair || needs_profile(schedule) || has_problem(family) {
        resolve(family, need_pair).map(Some)
    } else {
        Ok(None)
    }
}

pub fn cmd_schedule(args: &ScheduleCmdArgs) -> CliResult<Outcome> {
    let mut warnings = vec![];
    let problem = optional_problem(&args.family, &args.schedule, false)?;
    let profile = problem.as_ref().map(|p| &p.profile);
    let sched = build_schedule(&args.schedule, profile, &mut warnings)?;
    let dir = out_dir(&args.output)?;
    let residual = profile.and_then(|p| power_law_node_residual(&sched, p));
    let csv = dir.join("schedule.csv");
    write_schedule(&csv, &sched, profile.map(|p| p.kind().clone()), residual)?;
    let (a, b) = sched.boundary_derivatives();
    let first = sched.nodes()[0];
    let last = sched.nodes()[sched.nodes().len() - 1];
    let summary = json!({
        "metadata": Metadata::new("schedule", resolved(args)),
        "problem": problem.as_ref().map(Problem::info),
        "schedule": sched.family(),
        "nodes": sched.nodes().len(),
        "u0": first.u,
        "u1": last.u,
        "boundary_derivatives": [a, b],
        "ode_residual": residual,
        "files": file_list(&[&csv, &crate::formats::sidecar_path(&csv)]),
    });
    let text = format!(
        "{} schedule, {} nodes: u(0) = {}, u(1) = {}, u'(0) = {a:.6e}, u'(1) = {b:.6e}\n",
        sched.family().name(),
        sched.nodes().len(),
        first.u,
        last.u
    );
    Ok(Outcome { summary, text, warnings })
}

pub fn cmd_evolve(args: &EvolveArgs) -> CliResult<Outcome> {
    let mut warnings = vec![];
    let problem = resolve(&args.family, true)?;
    let pair = problem.require_pair()?;
    let runtime = positive("T", args.runtime.unwrap_or(defaults::RUNTIME))?;
    let steps = args.steps.unwrap_or_else(|| default_steps(runtime));
    let sched = build_schedule(&args.schedule, Some(&problem.profile), &mut warnings)?;
    let dump = args.dump_states.unwrap_or(false);
    let mut opts = PropagateOptions::new(steps);
    opts.keep_states = dump;
    let trace = propagate_with(pair, &sched, runtime, &opts)?;
    if trace.degenerate_start() {
        warnings.push(format!("H0 has a {}-fold ground space; started from one vector of it", trace.initial_ground_rank));
    }
    let dir = out_dir(&args.output)?;
    let csv = dir.join("trace.csv");
    write_trace_csv(&csv, &trace)?;
    let mut files = vec![csv];
    if dump {
        let path = dir.join("states.json");
        write_states_json(&path, &trace)?;
        files.push(path);
    }
    let summary_path = dir.join("evolve.json");
    files.push(summary_path.clone());
    let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let summary = json!({
        "metadata": Metadata::new("evolve", resolved(args)),
        "problem": problem.info(),
        "schedule": sched.family(),
        "T": runtime,
        "steps": steps,
        "recorded": trace.s_grid.len(),
        "final_error": trace.final_error(),
        "initial_ground_rank": trace.initial_ground_rank,
        "degenerate_start": trace.degenerate_start(),
        "files": file_list(&refs),
    });
    write_json(&summary_path, &summary)?;
    let text = format!(
        "{} schedule, T = {runtime}, {steps} steps: final error {:.6e}\n",
        sched.family().name(),
        trace.final_error()
    );
    Ok(Outcome { summary, text, warnings })
}

pub fn cmd_bound(args: &BoundArgs) -> CliResult<Outcome> {
    let mut warnings = vec![];
    let problem = resolve(&args.family, false)?;
    let runtime = positive("T", args.runtime.unwrap_or(defaults::RUNTIME))?;
    let s_end = args.s_end.unwrap_or(defaults::S_END);
    let x_grid = args.x_grid.unwrap_or(defaults::X_GRID);
    let sched = build_schedule(&args.schedule, Some(&problem.profile), &mut warnings)?;
    let a = problem.a_norm;
    let report = eta_components(a, &problem.profile, &sched, runtime, s_end)?;
    let named = named_measure_constant(&problem.profile);
    let c = bound_measure_constant(&problem.profile, x_grid)?;
    let mut summary = json!({
        "metadata": Metadata::new("bound", resolved(args)),
        "problem": problem.info(),
        "schedule": sched.family(),
        "report": report,
        "convention": "eta modulo the universal constant (C = 1)",
        "measure_constant": c,
        "measure_constant_source": if named.is_some() { "named family" } else { "empirical" },
    });
    let mut text = format!(
        "boundary {:.6e} + {:.6e}, |u''| integral {:.6e}, u'^2 integral {:.6e}; total/T {:.6e}, eta(T = {runtime}) {:.6e}\n",
        report.boundary_term_0,
        report.boundary_term_1,
        report.second_derivative_integral,
        report.first_derivative_integral,
        report.total_over_T,
        report.predicted_eta
    );
    match sched.family().exponent() {
        Some(p) if exponent_in_range(p) && s_end == 1.0 => {
            let k = theoretical_constants(a, c, p)?;
            let check = check_power_law_components(a, c, &problem.profile, &sched, runtime)?;
            text.push_str(&format!(
                "proof bounds (x1.05): boundary {:.6e}, |u''| {:.6e}, u'^2 {:.6e}: {}\n",
                check.boundary_bound,
                check.second_derivative_bound,
                check.first_derivative_bound,
                if check.holds { "hold" } else { "VIOLATED" }
            ));
            summary["constants"] = json!({
                "p": k.p, "c_p": k.c_p, "b1": k.b1, "b2": k.b2, "b0": k.b0,
                "c_p_bound": k.c_p_bound(problem.profile.min_gap()),
            });
            summary["component_check"] = json!(check);
        }
        None if matches!(sched.family(), adiasched_core::schedule::ScheduleFamily::Linear) => {
            let check = scaling_check_linear(&problem.profile, a)?;
            text.push_str(&format!(
                "linear-schedule bound {:.6e}: {}\n",
                check.bound,
                if check.holds { "holds" } else { "VIOLATED" }
            ));
            summary["linear_check"] = json!(check);
        }
        _ => {}
    }
    let dir = out_dir(&args.output)?;
    let path = dir.join("bound.json");
    summary["files"] = file_list(&[&path]);
    write_json(&path, &summary)?;
    Ok(Outcome { summary, text, warnings })
}

pub fn cmd_elcheck(args: &ElcheckArgs) -> CliResult<Outcome> {
    let mut warnings = vec![];
    let problem = resolve(&args.family, false)?;
    let grid = at_least("el-grid", args.el_grid.unwrap_or(defaults::EL_GRID), 3)?;
    let sched = build_schedule(&args.schedule, Some(&problem.profile), &mut warnings)?;
    let a = problem.a_norm;
    let r = el_full_residual(&sched, &problem.profile, a, grid)?;
    let i_sched = functional(&sched, &problem.profile, a)?;
    let i_linear = functional(&linear_schedule(defaults::SCHEDULE_GRID)?, &problem.profile, a)?;
    let dir = out_dir(&args.output)?;
    let csv = dir.join("residuals.csv");
    write_residuals_csv(&csv, &r)?;
    let json_path = dir.join("residuals.json");
    let max_full = ELResidualReport::max_abs(&r.full_residual, &r.excluded);
    let max_l1 = ELResidualReport::max_abs(&r.l1_residual, &r.excluded);
    let max_l2 = ELResidualReport::max_abs(&r.l2_residual, &r.excluded);
    let summary = json!({
        "metadata": Metadata::new("elcheck", resolved(args)),
        "problem": problem.info(),
        "schedule": sched.family(),
        "grid": grid,
        "l2_norm_full": r.l2_norm_full,
        "max_abs_full": max_full,
        "max_abs_l1": max_l1,
        "max_abs_l2": max_l2,
        "max_scale": r.max_scale(),
        "excluded_points": r.excluded.iter().filter(|&&x| x).count(),
        "functional": i_sched,
        "functional_linear": i_linear,
        "files": file_list(&[&csv, &json_path]),
    });
    write_json(&json_path, &summary)?;
    let text = format!(
        "{} schedule on {} points: full-residual L2 norm {:.6e}, max |L1| {:.6e}, max |L2| {:.6e} (scale {:.3e}); I = {:.6} vs linear {:.6}\n",
        sched.family().name(),
        grid,
        r.l2_norm_full,
        max_l1,
        max_l2,
        r.max_scale(),
        i_sched,
        i_linear
    );
    Ok(Outcome { summary, text, warnings })
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<Outcome> {
    let mut warnings = vec![];
    let kind = match args.family {
        Some(FamilyName::Grover) => FamilyKind::Grover,
        Some(FamilyName::Linear) => FamilyKind::QlsaLinear,
        Some(f) => return Err(invalid(format!("sweeps support grover and linear families, got {f:?}"))),
        None => return Err(invalid("sweep needs --family")),
    };
    let sizes = args.sizes.clone().ok_or_else(|| invalid("sweep needs --sizes"))?;
    if args.schedule.schedule_file.is_some() {
        return Err(invalid("sweeps synthesize their schedules; --schedule-file is not accepted"));
    }
    let schedule = match schedule_name(&args.schedule) {
        ScheduleName::Power => ScheduleKind::PowerLaw,
        ScheduleName::Linear => ScheduleKind::Linear,
        ScheduleName::Boundary => ScheduleKind::BoundaryCancellation,
    };
    let p = if schedule == ScheduleKind::PowerLaw {
        exponent(&args.schedule, &mut warnings)?
    } else {
        args.schedule.p.unwrap_or(defaults::P)
    };
    let epsilon = args.eps.unwrap_or(defaults::EPS);
    if !(epsilon > 0.001 && epsilon < 0.5) {
        return Err(invalid(format!("--eps must lie in (0.001, 0.5), got {epsilon}")));
    }
    let search = SearchOptions {
        t_lo: positive("t-lo", args.t_lo.unwrap_or(defaults::T_LO))?,
        growth: args.growth.unwrap_or(defaults::GROWTH),
        schedule_grid: args.schedule.schedule_grid.unwrap_or(defaults::SCHEDULE_GRID),
    };
    if !(search.growth > 1.0 && search.growth.is_finite()) {
        return Err(invalid(format!("--growth must exceed 1, got {}", search.growth)));
    }
    let spec = SweepSpec {
        kind,
        schedule,
        p,
        epsilon,
        dense: args.dense.unwrap_or(false),
        search,
    };
    let threads = thread_cap()?;
    let rows = run_sweep(&spec, &sizes, threads)?;
    let report = SweepReport::new(Metadata::new("sweep", resolved(args)), rows)?;
    let dir = out_dir(&args.output)?;
    let (json_path, csv_path) = (dir.join("report.json"), dir.join("report.csv"));
    emit_report(&report, &json_path, &csv_path)?;

    let mut text = String::from("size        delta_star   t_star        final_error  steps\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{:<11} {:<12.6} {:<13.6} {:<12.6} {}\n",
            r.size, r.min_gap, r.t_star, r.final_error, r.steps
        ));
    }
    if let Some(f) = &report.fit {
        text.push_str(&format!("fitted exponent {:.4} (r^2 = {:.4})\n", f.slope, f.r_squared));
    }
    let summary = json!({
        "report": report,
        "files": file_list(&[&json_path, &csv_path]),
    });
    Ok(Outcome { summary, text, warnings })
}
