//! Minimal-runtime search, size sweeps and log–log exponent fits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::evolve::{default_steps, final_error};
use crate::gap::{profile_from_pair, GapProfile};
use crate::operators::{build_grover, build_grover_reduced, build_qlsa, CMatrix, CVector, HamiltonianPair};
use crate::schedule::{boundary_cancellation_schedule, linear_schedule, synthesize_power_law, Schedule};

/// Runtimes beyond this abort the search.
pub const MAX_RUNTIME: f64 = 1e6;
/// Bisection rounds after the bracketing phase.
pub const BISECTION_ROUNDS: usize = 20;
/// Largest Grover instance built densely by default.
pub const DENSE_GROVER_LIMIT: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Grover,
    QlsaLinear,
    Custom,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Grover => "grover",
            FamilyKind::QlsaLinear => "qlsa_linear",
            FamilyKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
    PowerLaw,
    BoundaryCancellation,
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::PowerLaw => "power_law",
            ScheduleKind::BoundaryCancellation => "boundary_cancellation",
        }
    }
}

/// One member of a family: the Hamiltonian pair, the profile used for
/// scheduling and the quoted minimal gap.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub kind: FamilyKind,
    pub size: f64,
    pub pair: HamiltonianPair,
    pub profile: GapProfile,
    pub min_gap: f64,
}

impl FamilyInstance {
    pub fn a_norm(&self) -> f64 {
        self.pair.diff_norm()
    }
}

/// Grover on `n` items. The two-level invariant-subspace pair is used unless
/// `dense` is set; the dense pair is refused above [`DENSE_GROVER_LIMIT`].
pub fn grover_instance(n: u64, dense: bool) -> Result<FamilyInstance> {
    let profile = GapProfile::grover(n)?;
    let pair = if dense {
        if n > DENSE_GROVER_LIMIT {
            return Err(domain(format!("dense Grover limited to N <= {DENSE_GROVER_LIMIT}, got {n}")));
        }
        build_grover(n as usize, 0)?
    } else {
        build_grover_reduced(n as usize)?
    };
    Ok(FamilyInstance {
        kind: FamilyKind::Grover,
        size: n as f64,
        min_gap: profile.min_gap(),
        pair,
        profile,
    })
}

/// Linear-system instance `A = diag(1, 1/κ)`, `b = (1, 1)/√2`, scheduled on
/// the lower bound `Δ(u) = 1 − u + u/κ`.
pub fn qlsa_linear_instance(kappa: f64) -> Result<FamilyInstance> {
    let profile = GapProfile::linear_condition(kappa)?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let a = CMatrix::from_diagonal(&CVector::from_vec(alloc::vec![c(1.0), c(1.0 / kappa)]));
    let r = libm::sqrt(0.5);
    let b = CVector::from_vec(alloc::vec![c(r), c(r)]);
    Ok(FamilyInstance {
        kind: FamilyKind::QlsaLinear,
        size: kappa,
        min_gap: profile.min_gap(),
        pair: build_qlsa(&a, &b)?,
        profile,
    })
}

/// Arbitrary pair, profiled on a uniform grid.
pub fn custom_instance(pair: HamiltonianPair, grid_points: usize) -> Result<FamilyInstance> {
    let profile = profile_from_pair(&pair, grid_points)?;
    Ok(FamilyInstance {
        kind: FamilyKind::Custom,
        size: pair.dim() as f64,
        min_gap: profile.min_gap(),
        pair,
        profile,
    })
}

pub fn build_schedule(kind: ScheduleKind, profile: &GapProfile, p: f64, grid_points: usize) -> Result<Schedule> {
    match kind {
        ScheduleKind::Linear => linear_schedule(grid_points),
        ScheduleKind::PowerLaw => synthesize_power_law(profile, p, grid_points),
        ScheduleKind::BoundaryCancellation => boundary_cancellation_schedule(grid_points),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub t_lo: f64,
    pub growth: f64,
    pub schedule_grid: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            t_lo: 1.0,
            growth: 2.0,
            schedule_grid: 1025,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub family: String,
    pub size: f64,
    pub min_gap: f64,
    pub schedule: String,
    pub p: Option<f64>,
    pub epsilon: f64,
    pub t_star: f64,
    pub final_error: f64,
    pub steps: usize,
    /// `|e(2·steps) − e(steps)|` at `t_star`.
    pub step_check: f64,
}

/// Result of [`minimal_runtime`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeSearch {
    pub t_star: f64,
    pub final_error: f64,
    pub steps: usize,
    pub step_check: f64,
    pub evaluations: usize,
}

/// Smallest runtime (to bisection accuracy) whose final error is at most `epsilon`.
///
/// The runtime grows geometrically from `t_lo` until the target is met, then
/// the last bracket is bisected [`BISECTION_ROUNDS`] times.
pub fn minimal_runtime(pair: &HamiltonianPair, sched: &Schedule, epsilon: f64, t_lo: f64, growth: f64) -> Result<RuntimeSearch> {
    if !(epsilon > 0.001 && epsilon < 0.5) {
        return Err(domain(format!("epsilon must lie in (0.001, 0.5), got {epsilon}")));
    }
    if !(t_lo > 0.0) || !t_lo.is_finite() {
        return Err(domain(format!("t_lo must be positive, got {t_lo}")));
    }
    if !(growth > 1.0) || !growth.is_finite() {
        return Err(domain(format!("growth factor must exceed 1, got {growth}")));
    }
    let mut evaluations = 0;
    let mut eval = |t: f64| -> Result<f64> {
        evaluations += 1;
        final_error(pair, sched, t, default_steps(t))
    };

    let mut hi = t_lo;
    let mut e_hi = eval(hi)?;
    let mut lo = 0.0;
    let mut last_fail;
    while e_hi > epsilon {
        lo = hi;
        last_fail = e_hi;
        hi *= growth;
        if hi > MAX_RUNTIME {
            return Err(Error::NonConvergence(format!(
                "error {last_fail:.3e} still above {epsilon} at T = {lo:.3e} (limit {MAX_RUNTIME:.0e})"
            )));
        }
        e_hi = eval(hi)?;
    }
    if lo > 0.0 {
        for _ in 0..BISECTION_ROUNDS {
            let mid = 0.5 * (lo + hi);
            let e = eval(mid)?;
            if e <= epsilon {
                hi = mid;
                e_hi = e;
            } else {
                lo = mid;
            }
        }
    }
    let steps = default_steps(hi);
    let fine = final_error(pair, sched, hi, 2 * steps)?;
    Ok(RuntimeSearch {
        t_star: hi,
        final_error: e_hi,
        steps,
        step_check: (fine - e_hi).abs(),
        evaluations,
    })
}

/// One sweep point: build the schedule on the instance profile and search.
pub fn sweep_point(
    instance: &FamilyInstance,
    schedule: ScheduleKind,
    p: f64,
    epsilon: f64,
    opts: &SearchOptions,
) -> Result<SweepPoint> {
    let sched = build_schedule(schedule, &instance.profile, p, opts.schedule_grid)?;
    let r = minimal_runtime(&instance.pair, &sched, epsilon, opts.t_lo, opts.growth)?;
    Ok(SweepPoint {
        family: String::from(instance.kind.name()),
        size: instance.size,
        min_gap: instance.min_gap,
        schedule: String::from(schedule.name()),
        p: (schedule == ScheduleKind::PowerLaw).then_some(p),
        epsilon,
        t_star: r.t_star,
        final_error: r.final_error,
        steps: r.steps,
        step_check: r.step_check,
    })
}

pub fn validate_sizes(sizes: &[f64]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(domain(format!("a sweep needs at least 3 sizes, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("sweep sizes must be strictly ascending"));
    }
    Ok(())
}

/// Build the family member for a sweep size.
pub fn family_instance(kind: FamilyKind, size: f64, dense: bool) -> Result<FamilyInstance> {
    match kind {
        FamilyKind::Grover => {
            if size.fract() != 0.0 || size < 2.0 {
                return Err(domain(format!("Grover size must be an integer >= 2, got {size}")));
            }
            grover_instance(size as u64, dense)
        }
        FamilyKind::QlsaLinear => qlsa_linear_instance(size),
        FamilyKind::Custom => Err(domain("custom families are not indexed by size")),
    }
}

/// Sequential sweep over `sizes`.
pub fn scaling_sweep(
    kind: FamilyKind,
    sizes: &[f64],
    schedule: ScheduleKind,
    p: f64,
    epsilon: f64,
    opts: &SearchOptions,
) -> Result<Vec<SweepPoint>> {
    validate_sizes(sizes)?;
    sizes
        .iter()
        .map(|&n| sweep_point(&family_instance(kind, n, false)?, schedule, p, epsilon, opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln Δ*⁻¹, ln T*)`.
    pub points: Vec<(f64, f64)>,
}

/// Least squares of `ln T*` on `ln(1/Δ*)` over `(Δ*, T*)` pairs.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(domain(format!("a fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(d, t)| !(d > 0.0 && t > 0.0) || !d.is_finite() || !t.is_finite()) {
        return Err(domain("fit inputs must be positive and finite"));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(d, t)| (-libm::log(d), libm::log(t))).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(domain("fit needs at least two distinct gaps"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}

/// `fit_power_law` over the `(min_gap, t_star)` columns of a sweep.
pub fn fit_sweep(points: &[SweepPoint]) -> Result<ScalingFit> {
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.min_gap, p.t_star)).collect();
    fit_power_law(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::HermitianOperator;

    #[test]
    fn static_hamiltonian_needs_no_time() {
        let h = HermitianOperator::from_real_diagonal(&[-0.5, 0.5]).unwrap();
        let pair = HamiltonianPair::new(h.clone(), h).unwrap();
        let r = minimal_runtime(&pair, &linear_schedule(65).unwrap(), 0.1, 3.0, 2.0).unwrap();
        assert_eq!(r.t_star, 3.0);
        assert!(r.final_error <= 1e-10);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn search_validation() {
        let inst = grover_instance(4, false).unwrap();
        let s = linear_schedule(65).unwrap();
        assert!(minimal_runtime(&inst.pair, &s, 0.001, 1.0, 2.0).is_err());
        assert!(minimal_runtime(&inst.pair, &s, 0.5, 1.0, 2.0).is_err());
        assert!(minimal_runtime(&inst.pair, &s, 0.1, 0.0, 2.0).is_err());
        assert!(minimal_runtime(&inst.pair, &s, 0.1, 1.0, 1.0).is_err());
    }

    fn scan_oracle(inst: &FamilyInstance, sched: &Schedule, eps: f64, t_max: f64, dt: f64) -> f64 {
        let mut t = dt;
        while t <= t_max {
            if final_error(&inst.pair, sched, t, default_steps(t)).unwrap() <= eps {
                return t;
            }
            t += dt;
        }
        f64::INFINITY
    }

    #[test]
    fn grover_runtime_matches_scan() {
        let inst = grover_instance(4, false).unwrap();
        let pw = synthesize_power_law(&inst.profile, 1.5, 1025).unwrap();
        let r = minimal_runtime(&inst.pair, &pw, 0.1, 1.0, 2.0).unwrap();
        let oracle = scan_oracle(&inst, &pw, 0.1, 64.0, 0.01);
        assert!(((r.t_star - oracle) / oracle).abs() < 0.01, "{} {oracle}", r.t_star);
        assert!(r.final_error <= 0.1 && r.step_check < 1e-3);
        let lin = linear_schedule(1025).unwrap();
        let rl = minimal_runtime(&inst.pair, &lin, 0.1, 1.0, 2.0).unwrap();
        assert!(rl.t_star > r.t_star, "{} {}", rl.t_star, r.t_star);
    }

    #[test]
    fn sweep_min_gap_columns() {
        let opts = SearchOptions {
            schedule_grid: 257,
            ..SearchOptions::default()
        };
        let g = scaling_sweep(FamilyKind::Grover, &[4.0, 16.0, 64.0], ScheduleKind::PowerLaw, 1.5, 0.1, &opts).unwrap();
        let gaps: Vec<f64> = g.iter().map(|p| p.min_gap).collect();
        assert_eq!(gaps, [0.5, 0.25, 0.125]);
        assert!(g.iter().all(|p| p.final_error <= p.epsilon && p.t_star > 0.0));
        let q = scaling_sweep(FamilyKind::QlsaLinear, &[2.0, 4.0, 8.0], ScheduleKind::Linear, 1.5, 0.1, &opts).unwrap();
        let gaps: Vec<f64> = q.iter().map(|p| p.min_gap).collect();
        assert_eq!(gaps, [0.5, 0.25, 0.125]);
        assert!(scaling_sweep(FamilyKind::Grover, &[4.0, 16.0], ScheduleKind::Linear, 1.5, 0.1, &opts).is_err());
        assert!(scaling_sweep(FamilyKind::Grover, &[16.0, 4.0, 64.0], ScheduleKind::Linear, 1.5, 0.1, &opts).is_err());
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        let d = [0.5, 0.25, 0.125, 0.0625];
        let f1 = fit_power_law(&d.map(|x| (x, 1.0 / x))).unwrap();
        assert!((f1.slope - 1.0).abs() < 1e-12 && (f1.r_squared - 1.0).abs() < 1e-12);
        let f2 = fit_power_law(&d.map(|x| (x, 3.0 / (x * x)))).unwrap();
        assert!((f2.slope - 2.0).abs() < 1e-12);
        assert!((f2.intercept - 3f64.ln()).abs() < 1e-12);
        assert_eq!(f2.points.len(), 4);
        assert!(fit_power_law(&[(0.5, 1.0), (0.25, 2.0)]).is_err());
        assert!(fit_power_law(&[(0.5, 1.0), (0.0, 2.0), (0.1, 3.0)]).is_err());
        assert!(fit_power_law(&[(0.5, 1.0), (0.25, -2.0), (0.1, 3.0)]).is_err());
    }

    #[test]
    fn qlsa_instance_gap_dominates_profile() {
        let inst = qlsa_linear_instance(4.0).unwrap();
        for k in 0..=20 {
            let u = k as f64 / 20.0;
            assert!(inst.pair.gap_at(u).unwrap() >= inst.profile.delta(u) - 1e-12);
        }
        assert_eq!(inst.min_gap, 0.25);
    }

    #[test]
    fn dense_grover_is_capped() {
        assert!(grover_instance(2048, true).is_err());
        assert!(grover_instance(2048, false).is_ok());
        assert!(family_instance(FamilyKind::Grover, 4.5, false).is_err());
    }

    proptest::proptest! {
        #[test]
        fn fit_recovers_exponent(k in 0.2f64..3.0, c in 0.1f64..10.0) {
            let pts: Vec<(f64, f64)> = [0.5, 0.2, 0.05, 0.01].iter().map(|&d| (d, c * libm::pow(d, -k))).collect();
            let f = fit_power_law(&pts).unwrap();
            proptest::prop_assert!((f.slope - k).abs() < 1e-10);
            proptest::prop_assert!(f.r_squared > 1.0 - 1e-12);
        }
    }
}
