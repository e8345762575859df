//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use adiasched_core::bounds::{check_power_law_components, eta_components};
use adiasched_core::evolve::{convergence_probe, propagate, propagate_with, richardson_ok, PropagateOptions};
use adiasched_core::gap::{check_gap_integral, estimate_measure_constant_with, GapProfile};
use adiasched_core::harness::{fit_sweep, grover_instance, qlsa_linear_instance, FamilyInstance, FamilyKind, ScheduleKind, SearchOptions};
use adiasched_core::operators::{HamiltonianPair, HermitianOperator};
use adiasched_core::schedule::{linear_schedule, normalization_constant, synthesize_power_law, ScheduleFamily};
use adiasched_core::variational::{el_full_residual, el_full_residual_at, functional, l2_residual};
use adiasched_std::sweep::{run_sweep, thread_cap, SweepSpec};

const GROVER_SIZES: [u64; 2] = [4, 64];
const KAPPAS: [f64; 2] = [2.0, 8.0];
const RESOLUTION: usize = 4096;
const X_GRID: usize = 256;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Grover N ∈ {4, 64} and the linear family κ ∈ {2, 8}.
fn families() -> Vec<(String, FamilyInstance)> {
    let mut v: Vec<(String, FamilyInstance)> = GROVER_SIZES
        .iter()
        .map(|&n| (format!("grover N={n}"), grover_instance(n, false).unwrap()))
        .collect();
    v.extend(KAPPAS.iter().map(|&k| (format!("linear kappa={k}"), qlsa_linear_instance(k).unwrap())));
    v
}

fn c_hat(profile: &GapProfile) -> f64 {
    estimate_measure_constant_with(profile, X_GRID, RESOLUTION).unwrap().constant_hat
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let sizes = [4.0, 16.0, 64.0, 256.0, 1024.0];
    let threads = thread_cap().unwrap_or(1);
    let fit = |schedule| {
        let spec = SweepSpec {
            kind: FamilyKind::Grover,
            schedule,
            p: 1.5,
            epsilon: 0.1,
            dense: false,
            search: SearchOptions::default(),
        };
        fit_sweep(&run_sweep(&spec, &sizes, threads).unwrap()).unwrap()
    };
    let pl = fit(ScheduleKind::PowerLaw);
    let lin = fit(ScheduleKind::Linear);
    let pass = (0.85..=1.15).contains(&pl.slope)
        && (1.8..=2.2).contains(&lin.slope)
        && pl.r_squared >= 0.98
        && lin.r_squared >= 0.98;
    outcome(
        pass,
        format!(
            "power-law slope {:.4} (r2 {:.4}, want [0.85, 1.15]); linear slope {:.4} (r2 {:.4}, want [1.8, 2.2])",
            pl.slope, pl.r_squared, lin.slope, lin.r_squared
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for n in GROVER_SIZES {
        let c = c_hat(&GapProfile::grover(n).unwrap());
        let want = (n as f64 / (n as f64 - 1.0)).sqrt();
        let ok = rel(c, want) <= 0.05;
        pass &= ok;
        parts.push(format!("grover N={n}: {c:.4} vs {want:.4} {}", if ok { "ok" } else { "off" }));
    }
    for k in KAPPAS {
        let c = c_hat(&GapProfile::linear_condition(k).unwrap());
        let want = k / (k - 1.0);
        let ok = rel(c, want) <= 0.05;
        pass &= ok;
        parts.push(format!("kappa={k}: {c:.4} vs {want:.4} {}", if ok { "ok" } else { "off" }));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (name, inst) in families() {
        let c = c_hat(&inst.profile);
        for alpha in [1.5, 2.0, 2.5, 3.0] {
            let chk = check_gap_integral(&inst.profile, alpha, c, 0.02).unwrap();
            if !chk.holds {
                pass = false;
                eprintln!("  {name} alpha={alpha}: {} > {}", chk.integral, chk.bound);
            }
            worst = worst.max(chk.integral / chk.bound);
        }
    }
    outcome(pass, format!("largest integral/bound ratio {worst:.4} (limit 1.02)"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (_, inst) in families() {
        let c = c_hat(&inst.profile);
        for p in [1.2, 1.5, 1.8] {
            let cp = normalization_constant(&inst.profile, p).unwrap();
            let bound = c * p / (p - 1.0) * inst.min_gap.powf(-(p - 1.0));
            pass &= cp <= bound * 1.02;
            worst = worst.max(cp / bound);
        }
    }
    let mut closed_err = 0.0f64;
    for k in KAPPAS.into_iter().chain([4.0, 16.0]) {
        for p in [1.2, 1.5, 1.8] {
            let cp = normalization_constant(&GapProfile::linear_condition(k).unwrap(), p).unwrap();
            let exact = (k.powf(p - 1.0) - 1.0) * k / ((k - 1.0) * (p - 1.0));
            closed_err = closed_err.max(rel(cp, exact));
        }
    }
    pass &= closed_err <= 1e-7;
    outcome(
        pass,
        format!("largest c_p/bound {worst:.4} (limit 1.02); closed-form linear c_p max rel. error {closed_err:.2e} (limit 1e-7)"),
    )
}

fn criterion_5() -> Outcome {
    let lin = GapProfile::linear_condition(4.0).unwrap();
    let aligned = |g: usize| {
        let s = synthesize_power_law(&lin, 1.5, g).unwrap();
        el_full_residual(&s, &lin, 1.0, g).unwrap().l2_norm_full
    };
    let staggered = |g: usize| {
        let s = synthesize_power_law(&lin, 1.5, g).unwrap();
        el_full_residual(&s, &lin, 1.0, 2 * g - 1).unwrap().l2_norm_full
    };
    let at_1025 = aligned(1025);
    let a = [aligned(257), aligned(513), at_1025];
    let st = [staggered(129), staggered(257), staggered(513)];
    let halving = st[1] <= st[0] / 2.0 && st[2] <= st[1] / 2.0;

    let mut l2_ok = true;
    let mut l2_worst = 0.0f64;
    for profile in [
        GapProfile::constant(1.0).unwrap(),
        GapProfile::linear_condition(4.0).unwrap(),
        GapProfile::grover(16).unwrap(),
        GapProfile::grover(1024).unwrap(),
    ] {
        let s = synthesize_power_law(&profile, 1.5, 1025).unwrap();
        let ScheduleFamily::PowerLaw { c_p, .. } = *s.family() else { unreachable!() };
        let scale = c_p * c_p * profile.max_gap().powi(3);
        let r = l2_residual(&s, &profile, 1025).unwrap();
        let m = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
        l2_worst = l2_worst.max(m);
        l2_ok &= m <= 1e-6;
    }
    outcome(
        at_1025 <= 1e-4 && halving && l2_ok,
        format!(
            "L2 norm at 1025 = {at_1025:.2e} (aligned 257/513/1025: {:.2e}/{:.2e}/{:.2e}); staggered 129/257/513: {:.2e}/{:.2e}/{:.2e} {}; L2-component max/scale {l2_worst:.2e} (limit 1e-6)",
            a[0], a[1], a[2], st[0], st[1], st[2],
            if halving { "halving" } else { "NOT halving" }
        ),
    )
}

fn criterion_6() -> Outcome {
    let sched = linear_schedule(1025).unwrap();
    let mut worst = 0.0f64;
    for k in [2.0, 4.0, 8.0] {
        let inst = qlsa_linear_instance(k).unwrap();
        let a = inst.a_norm();
        let slope = -(1.0 - 1.0 / k);
        for i in 0..=200 {
            let s = i as f64 / 200.0;
            let d = 1.0 + slope * s;
            let exact = 3.0 * a * slope / d.powi(4);
            let got = el_full_residual_at(&sched, &inst.profile, a, s).unwrap();
            worst = worst.max(rel(got, exact));
        }
    }
    let closed_ok = worst <= 1e-8;
    let mut parts = vec![format!("linear-schedule residual vs 3A*D'/D^4 max rel. error {worst:.2e}")];
    let mut wins = true;
    for (name, inst) in [
        ("grover N=16", grover_instance(16, false).unwrap()),
        ("linear kappa=4", qlsa_linear_instance(4.0).unwrap()),
    ] {
        let pl = synthesize_power_law(&inst.profile, 1.5, 1025).unwrap();
        let i_pl = functional(&pl, &inst.profile, inst.a_norm()).unwrap();
        let i_lin = functional(&sched, &inst.profile, inst.a_norm()).unwrap();
        wins &= i_pl < i_lin;
        parts.push(format!("{name}: I[power-law] {i_pl:.4} vs I[linear] {i_lin:.4}"));
    }
    outcome(closed_ok && wins, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let g = grover_instance(16, false).unwrap();
    let sched = synthesize_power_law(&g.profile, 1.5, 1025).unwrap();
    let mut opts = PropagateOptions::new(100_000);
    opts.keep_states = true;
    let trace = propagate_with(&g.pair, &sched, 500.0, &opts).unwrap();
    let mut drift = trace.states.iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()));
    let dense = grover_instance(8, true).unwrap();
    let sd = synthesize_power_law(&dense.profile, 1.5, 257).unwrap();
    let td = propagate_with(&dense.pair, &sd, 200.0, &opts).unwrap();
    drift = drift.max(td.states.iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs())));

    let h = HermitianOperator::from_real_diagonal(&[-0.5, 0.1, 0.4]).unwrap();
    let stat = HamiltonianPair::new(h.clone(), h).unwrap();
    let st = propagate(&stat, &linear_schedule(65).unwrap(), 37.0, 4096).unwrap();
    let static_err = st.errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));

    let g4 = grover_instance(4, false).unwrap();
    let s4 = synthesize_power_law(&g4.profile, 1.5, 1025).unwrap();
    let probe = convergence_probe(&g4.pair, &s4, 50.0, &[512, 1024, 2048]).unwrap();
    let rich = richardson_ok(&probe, 3.0, 1e-13);
    let d1 = (probe[1].1 - probe[0].1).abs();
    let d2 = (probe[2].1 - probe[1].1).abs();
    outcome(
        drift < 1e-9 && static_err <= 1e-10 && rich,
        format!(
            "norm drift over 1e5 steps {drift:.2e} (limit 1e-9); static error {static_err:.2e} (limit 1e-10); Richardson differences {d1:.2e} -> {d2:.2e} (ratio {:.2}, need >= 3)",
            d1 / d2
        ),
    )
}

fn criterion_8() -> Outcome {
    let lin = linear_schedule(1025).unwrap();
    let mut worst_lin = 0.0f64;
    for n in [4u64, 16, 64] {
        let inst = grover_instance(n, false).unwrap();
        let a = inst.a_norm();
        let r = eta_components(a, &inst.profile, &lin, 100.0, 1.0).unwrap();
        // ∫₀¹ Δ⁻³ du = N for the Grover gap.
        worst_lin = worst_lin.max(rel(r.first_derivative_integral, a * a * n as f64));
    }
    for k in KAPPAS {
        let inst = qlsa_linear_instance(k).unwrap();
        let a = inst.a_norm();
        let r = eta_components(a, &inst.profile, &lin, 100.0, 1.0).unwrap();
        let slope = 1.0 - 1.0 / k;
        let exact = ((1.0 - slope).powi(-2) - 1.0) / (2.0 * slope);
        worst_lin = worst_lin.max(rel(r.first_derivative_integral, a * a * exact));
    }
    let mut comp_ok = true;
    let mut worst_ratio = 0.0f64;
    for (name, inst) in families() {
        let c = c_hat(&inst.profile);
        let sched = synthesize_power_law(&inst.profile, 1.5, 1025).unwrap();
        let chk = check_power_law_components(inst.a_norm(), c, &inst.profile, &sched, 100.0).unwrap();
        let r = chk.report;
        let ratios = [
            r.boundary_term_0 / chk.boundary_bound,
            r.boundary_term_1 / chk.boundary_bound,
            r.second_derivative_integral / chk.second_derivative_bound,
            r.first_derivative_integral / chk.first_derivative_bound,
        ];
        worst_ratio = ratios.iter().fold(worst_ratio, |m, &x| m.max(x));
        if !chk.holds {
            eprintln!("  {name}: component ratios {ratios:?}");
        }
        comp_ok &= chk.holds;
    }
    outcome(
        worst_lin <= 1e-7 && comp_ok,
        format!(
            "linear first-derivative integral vs A^2*int D^-3 max rel. error {worst_lin:.2e} (limit 1e-7); largest power-law component/bound {worst_ratio:.4} (limit 1.05)"
        ),
    )
}

fn sweep_json(dir: &Path, threads: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_adiasched"))
        .args(["sweep", "--family", "grover", "--sizes", "4,16,64", "--schedule", "power", "--p", "1.5", "--eps", "0.1", "--out"])
        .arg(dir)
        .env("ADIA_THREADS", threads)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(dir.join("report.json")).unwrap()
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let a = sweep_json(&tmp.path().join("a"), "4");
    let b = sweep_json(&tmp.path().join("b"), "4");
    let c = sweep_json(&tmp.path().join("c"), "1");
    outcome(
        a == b && b == c && !a.is_empty(),
        format!(
            "two identical sweep runs {} ({} bytes); single-thread run {}",
            if a == b { "byte-identical" } else { "DIFFER" },
            a.len(),
            if b == c { "identical too" } else { "differs" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Grover exponent separation", criterion_1),
        ("measure constants", criterion_2),
        ("gap-integral bound", criterion_3),
        ("c_p bound", criterion_4),
        ("Euler-Lagrange optimality", criterion_5),
        ("linear-schedule non-optimality", criterion_6),
        ("dynamics integrity", criterion_7),
        ("bound-component consistency", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} [{name}]: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
