//! Propagation of `(i/T)·∂ₛψ = H(u(s))·ψ` and the adiabatic error
//! `1 − ⟨ψ|P₀(s)|ψ⟩` along the way.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::operators::{interpolate_unchecked, spectral_decompose, CMatrix, CVector, HamiltonianPair};
use crate::schedule::{Schedule, ScheduleFamily};

/// Fewest steps accepted by [`propagate`].
pub const MIN_STEPS: usize = 16;
/// Most states kept in a trace.
pub const DEFAULT_RECORD_CAP: usize = 1025;

/// `max(4096, ⌈64·T⌉)`.
pub fn default_steps(runtime: f64) -> usize {
    let scaled = libm::ceil(64.0 * runtime);
    if scaled.is_finite() && scaled > 4096.0 {
        scaled as usize
    } else {
        4096
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub s_grid: Vec<f64>,
    /// Recorded states; empty when state keeping was disabled.
    pub states: Vec<CVector>,
    pub errors: Vec<f64>,
    pub runtime_t: f64,
    pub steps: usize,
    pub schedule_family: ScheduleFamily,
    /// Dimension of the ground space of `H₀`; above one the initial state is
    /// one arbitrary vector of that space.
    pub initial_ground_rank: usize,
}

impl EvolutionTrace {
    pub fn final_error(&self) -> f64 {
        self.errors[self.errors.len() - 1]
    }

    pub fn final_state(&self) -> Option<&CVector> {
        self.states.last()
    }

    pub fn degenerate_start(&self) -> bool {
        self.initial_ground_rank > 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateOptions {
    pub steps: usize,
    /// Recorded nodes, including both ends; at least 2.
    pub record_cap: usize,
    pub keep_states: bool,
    /// Overrides the ground state of `H₀` as the initial state.
    pub initial_state: Option<CVector>,
    /// Ground-space tolerance; `None` uses `1e-8·‖H(u)‖`.
    pub degeneracy_tol: Option<f64>,
}

impl PropagateOptions {
    pub fn new(steps: usize) -> Self {
        Self {
            steps,
            record_cap: DEFAULT_RECORD_CAP,
            keep_states: true,
            initial_state: None,
            degeneracy_tol: None,
        }
    }
}

/// Ground state of `H₀` and the rank of its ground space.
pub fn initial_ground_state(pair: &HamiltonianPair, degeneracy_tol: Option<f64>) -> Result<(CVector, usize)> {
    let dec = spectral_decompose(pair.h0())?;
    let tol = degeneracy_tol.unwrap_or_else(|| dec.default_degeneracy_tol());
    Ok((dec.eigenvectors().column(0).into_owned(), dec.ground_rank(tol)))
}

/// `1 − ⟨ψ|P₀(u)|ψ⟩`.
pub fn ground_defect(pair: &HamiltonianPair, u: f64, psi: &CVector, degeneracy_tol: Option<f64>) -> Result<f64> {
    let dec = spectral_decompose(&interpolate_unchecked(pair, u.clamp(0.0, 1.0)))?;
    let tol = degeneracy_tol.unwrap_or_else(|| dec.default_degeneracy_tol());
    Ok(1.0 - dec.ground_population(tol, psi))
}

pub fn propagate(pair: &HamiltonianPair, sched: &Schedule, runtime: f64, steps: usize) -> Result<EvolutionTrace> {
    propagate_with(pair, sched, runtime, &PropagateOptions::new(steps))
}

/// Midpoint exponential rule `ψ ← exp(−i·T·h·H(u(s + h/2)))·ψ`.
pub fn propagate_with(pair: &HamiltonianPair, sched: &Schedule, runtime: f64, opts: &PropagateOptions) -> Result<EvolutionTrace> {
    validate(runtime, opts.steps)?;
    if opts.record_cap < 2 {
        return Err(domain("record cap must be at least 2"));
    }
    let (ground, rank) = initial_ground_state(pair, opts.degeneracy_tol)?;
    let mut psi = match &opts.initial_state {
        Some(v) => {
            if v.len() != pair.dim() {
                return Err(domain(format!("initial state has length {}, expected {}", v.len(), pair.dim())));
            }
            let n = v.norm();
            if (n - 1.0).abs() > 1e-10 {
                return Err(domain(format!("initial state must be normalized, norm {n}")));
            }
            v.clone()
        }
        None => ground,
    };

    let steps = opts.steps;
    let h = 1.0 / steps as f64;
    let tau = runtime * h;
    let record = record_indices(steps, opts.record_cap);
    let mut next_record = 0;
    let mut trace = EvolutionTrace {
        s_grid: Vec::with_capacity(record.len()),
        states: Vec::new(),
        errors: Vec::with_capacity(record.len()),
        runtime_t: runtime,
        steps,
        schedule_family: *sched.family(),
        initial_ground_rank: rank,
    };
    let push = |k: usize, psi: &CVector, trace: &mut EvolutionTrace| -> Result<()> {
        let s = if k == steps { 1.0 } else { k as f64 * h };
        let (u, _, _) = sched.eval_clamped(s);
        trace.s_grid.push(s);
        trace.errors.push(ground_defect(pair, u, psi, opts.degeneracy_tol)?);
        if opts.keep_states {
            trace.states.push(psi.clone());
        }
        Ok(())
    };

    let two_level = pair.dim() == 2;
    for k in 0..steps {
        if record[next_record] == k {
            push(k, &psi, &mut trace)?;
            next_record += 1;
        }
        let (u, _, _) = sched.eval_clamped((k as f64 + 0.5) * h);
        let hm = interpolate_unchecked(pair, u);
        psi = if two_level {
            exp2_apply(hm.matrix(), tau, &psi)
        } else {
            spectral_decompose(&hm)?.apply_exp(tau, &psi)
        };
    }
    push(steps, &psi, &mut trace)?;
    Ok(trace)
}

fn validate(runtime: f64, steps: usize) -> Result<()> {
    if !(runtime > 0.0) || !runtime.is_finite() {
        return Err(domain(format!("runtime must be positive, got {runtime}")));
    }
    if steps < MIN_STEPS {
        return Err(domain(format!("at least {MIN_STEPS} steps required, got {steps}")));
    }
    Ok(())
}

/// Step indices `< steps` at which to record; the final state is always
/// recorded separately.
fn record_indices(steps: usize, cap: usize) -> Vec<usize> {
    let stride = (steps + cap - 2) / (cap - 1);
    let mut idx: Vec<usize> = (0..steps).step_by(stride.max(1)).collect();
    idx.push(usize::MAX);
    idx
}

/// `exp(−iτH)·ψ` for a 2x2 Hermitian `H`, from its closed-form spectral
/// decomposition `H = m·I + r·n̂·σ`.
fn exp2_apply(h: &CMatrix, tau: f64, psi: &CVector) -> CVector {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let m = 0.5 * (a + d);
    let z = 0.5 * (a - d);
    let r = libm::hypot(z, b.norm());
    let (sr, cr) = libm::sincos(tau * r);
    let k = if r > 0.0 { sr / r } else { tau };
    let (sm, cm) = libm::sincos(-tau * m);
    let phase = Complex64::new(cm, sm);
    let mi = Complex64::new(0.0, -k);
    // cos(τr)·I − i·sin(τr)/r·(H − m·I)
    let u00 = Complex64::new(cr, 0.0) + mi * z;
    let u11 = Complex64::new(cr, 0.0) - mi * z;
    let u01 = mi * b;
    let u10 = mi * b.conj();
    CVector::from_vec(alloc::vec![
        phase * (u00 * psi[0] + u01 * psi[1]),
        phase * (u10 * psi[0] + u11 * psi[1]),
    ])
}

/// 1 − ground population at `s = 1` only, without recording intermediate nodes.
pub fn final_error(pair: &HamiltonianPair, sched: &Schedule, runtime: f64, steps: usize) -> Result<f64> {
    let mut opts = PropagateOptions::new(steps);
    opts.record_cap = 2;
    opts.keep_states = false;
    Ok(propagate_with(pair, sched, runtime, &opts)?.final_error())
}

/// Nearest recorded node; states are not interpolated.
pub fn adiabatic_error_at(trace: &EvolutionTrace, s: f64) -> Result<f64> {
    if trace.s_grid.is_empty() {
        return Err(domain("empty trace"));
    }
    let i = trace.s_grid.partition_point(|&x| x < s);
    let best = if i == 0 {
        0
    } else if i == trace.s_grid.len() {
        i - 1
    } else if (trace.s_grid[i] - s).abs() < (s - trace.s_grid[i - 1]).abs() {
        i
    } else {
        i - 1
    };
    Ok(trace.errors[best])
}

/// Final error for each step count.
pub fn convergence_probe(pair: &HamiltonianPair, sched: &Schedule, runtime: f64, steps_list: &[usize]) -> Result<Vec<(usize, f64)>> {
    if steps_list.len() < 2 || steps_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("steps list must be ascending with at least two entries"));
    }
    steps_list
        .iter()
        .map(|&n| Ok((n, final_error(pair, sched, runtime, n)?)))
        .collect()
}

/// Whether successive differences of a probe shrink by at least `factor`.
/// Differences already at the round-off floor count as converged.
pub fn richardson_ok(probe: &[(usize, f64)], factor: f64, floor: f64) -> bool {
    let diffs: Vec<f64> = probe.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    diffs.windows(2).all(|d| d[1] <= d[0] / factor || d[1] <= floor)
}

/// Classical RK4 with renormalization after every step; an independent
/// reference for the exponential integrator.
pub fn propagate_rk4(pair: &HamiltonianPair, sched: &Schedule, runtime: f64, steps: usize) -> Result<CVector> {
    validate(runtime, steps)?;
    let (mut psi, _) = initial_ground_state(pair, None)?;
    let h = 1.0 / steps as f64;
    let minus_i_t = Complex64::new(0.0, -runtime);
    let rhs = |s: f64, v: &CVector| -> CVector {
        let (u, _, _) = sched.eval_clamped(s);
        interpolate_unchecked(pair, u).matrix() * v * minus_i_t
    };
    let hc = Complex64::new(h, 0.0);
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = rhs(s, &psi);
        let k2 = rhs(s + 0.5 * h, &(&psi + &k1 * (hc * 0.5)));
        let k3 = rhs(s + 0.5 * h, &(&psi + &k2 * (hc * 0.5)));
        let k4 = rhs(s + h, &(&psi + &k3 * hc));
        psi += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0);
        let n = psi.norm();
        psi /= Complex64::new(n, 0.0);
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap::GapProfile;
    use crate::operators::{build_grover, build_grover_reduced, HermitianOperator};
    use crate::schedule::{boundary_cancellation_schedule, linear_schedule, synthesize_power_law};

    fn static_pair() -> HamiltonianPair {
        let h = HermitianOperator::from_parts(
            &[alloc::vec![0.2, 0.3, 0.0], alloc::vec![0.3, -0.1, 0.1], alloc::vec![0.0, 0.1, 0.5]],
            &[alloc::vec![0.0, 0.1, 0.0], alloc::vec![-0.1, 0.0, 0.2], alloc::vec![0.0, -0.2, 0.0]],
        )
        .unwrap();
        HamiltonianPair::new(h.clone(), h).unwrap()
    }

    fn grover4_power() -> (HamiltonianPair, Schedule) {
        let g = GapProfile::grover(4).unwrap();
        (build_grover_reduced(4).unwrap(), synthesize_power_law(&g, 1.5, 1025).unwrap())
    }

    #[test]
    fn static_hamiltonian_keeps_ground_state() {
        let pair = static_pair();
        let sched = linear_schedule(65).unwrap();
        for (t, steps) in [(1.0, 16), (50.0, 256), (1000.0, 1000)] {
            let tr = propagate(&pair, &sched, t, steps).unwrap();
            assert!(tr.errors.iter().all(|e| e.abs() <= 1e-10), "{:?}", tr.errors);
            assert!(adiabatic_error_at(&tr, 1.0).unwrap() <= 1e-10);
        }
        let probe = convergence_probe(&pair, &sched, 10.0, &[16, 32, 64]).unwrap();
        assert!(probe.iter().all(|p| p.1.abs() <= 1e-10));
    }

    #[test]
    fn two_level_exponential_matches_spectral() {
        let pair = build_grover_reduced(16).unwrap();
        let psi = CVector::from_vec(alloc::vec![Complex64::new(0.6, 0.1), Complex64::new(0.2, -0.766)]);
        for u in [0.0, 0.3, 0.5, 0.9] {
            let hm = interpolate_unchecked(&pair, u);
            let a = exp2_apply(hm.matrix(), 0.37, &psi);
            let b = spectral_decompose(&hm).unwrap().apply_exp(0.37, &psi);
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn grover_power_law_example() {
        let (pair, sched) = grover4_power();
        let tr = propagate(&pair, &sched, 50.0, 4096).unwrap();
        assert!(tr.errors[0] <= 1e-10);
        assert!(tr.final_error() < 0.05, "{}", tr.final_error());
        let reference = final_error(&pair, &sched, 50.0, 65536).unwrap();
        assert!((tr.final_error() - reference).abs() < 1e-4);
        let lin = propagate(&pair, &linear_schedule(1025).unwrap(), 50.0, 4096).unwrap();
        assert!(lin.final_error() > tr.final_error());
        assert!(tr.s_grid.len() <= DEFAULT_RECORD_CAP);
        assert_eq!(tr.s_grid[tr.s_grid.len() - 1], 1.0);
        for (psi, e) in tr.states.iter().zip(&tr.errors) {
            assert!((psi.norm() - 1.0).abs() < 1e-10);
            assert!(*e >= -1e-10 && *e <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn reduced_and_dense_grover_agree() {
        let g = GapProfile::grover(16).unwrap();
        let sched = synthesize_power_law(&g, 1.5, 257).unwrap();
        let dense = final_error(&build_grover(16, 3).unwrap(), &sched, 20.0, 512).unwrap();
        let reduced = final_error(&build_grover_reduced(16).unwrap(), &sched, 20.0, 512).unwrap();
        assert!((dense - reduced).abs() < 1e-8, "{dense} {reduced}");
    }

    #[test]
    fn second_order_in_steps() {
        let (pair, sched) = grover4_power();
        let probe = convergence_probe(&pair, &sched, 50.0, &[512, 1024, 2048]).unwrap();
        assert!(richardson_ok(&probe, 3.0, 1e-13), "{probe:?}");
        let bc = boundary_cancellation_schedule(1025).unwrap();
        let probe = convergence_probe(&pair, &bc, 50.0, &[512, 1024, 2048]).unwrap();
        assert!(richardson_ok(&probe, 3.0, 1e-13), "{probe:?}");
    }

    #[test]
    fn rk4_reference_agrees() {
        let (pair, sched) = grover4_power();
        let psi = propagate_rk4(&pair, &sched, 50.0, 4096).unwrap();
        let e_rk = ground_defect(&pair, 1.0, &psi, None).unwrap();
        let e_mid = final_error(&pair, &sched, 50.0, 4096).unwrap();
        assert!((e_rk - e_mid).abs() < 1e-4, "{e_rk} {e_mid}");
    }

    #[test]
    fn global_phase_is_irrelevant() {
        let (pair, sched) = grover4_power();
        let (g, _) = initial_ground_state(&pair, None).unwrap();
        let mut opts = PropagateOptions::new(1024);
        let base = propagate_with(&pair, &sched, 10.0, &opts).unwrap();
        opts.initial_state = Some(g * Complex64::from_polar(1.0, 0.731));
        let rotated = propagate_with(&pair, &sched, 10.0, &opts).unwrap();
        for (a, b) in base.errors.iter().zip(&rotated.errors) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_start_is_flagged() {
        let h0 = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 1.0]).unwrap();
        let h1 = HermitianOperator::from_real_diagonal(&[0.0, 0.5, 1.0]).unwrap();
        let pair = HamiltonianPair::new(h0, h1).unwrap();
        let tr = propagate(&pair, &linear_schedule(33).unwrap(), 5.0, 64).unwrap();
        assert_eq!(tr.initial_ground_rank, 2);
        assert!(tr.degenerate_start());
        assert!(tr.errors[0] <= 1e-10);
    }

    #[test]
    fn validation_and_lookup() {
        let (pair, sched) = grover4_power();
        assert!(propagate(&pair, &sched, 0.0, 64).is_err());
        assert!(propagate(&pair, &sched, 1.0, 8).is_err());
        assert!(convergence_probe(&pair, &sched, 1.0, &[64]).is_err());
        assert!(convergence_probe(&pair, &sched, 1.0, &[64, 32]).is_err());
        let mut opts = PropagateOptions::new(100);
        opts.record_cap = 11;
        let tr = propagate_with(&pair, &sched, 5.0, &opts).unwrap();
        assert!(tr.s_grid.len() <= 12);
        assert_eq!(adiabatic_error_at(&tr, 0.0).unwrap(), tr.errors[0]);
        assert_eq!(adiabatic_error_at(&tr, 0.999).unwrap(), tr.final_error());
        let empty = EvolutionTrace {
            s_grid: Vec::new(),
            states: Vec::new(),
            errors: Vec::new(),
            runtime_t: 1.0,
            steps: 16,
            schedule_family: ScheduleFamily::Linear,
            initial_ground_rank: 1,
        };
        assert!(adiabatic_error_at(&empty, 0.5).is_err());
        assert_eq!(default_steps(10.0), 4096);
        assert_eq!(default_steps(100.5), 6432);
    }

    #[test]
    fn unit_norm_over_many_steps() {
        let (pair, sched) = grover4_power();
        let mut opts = PropagateOptions::new(100_000);
        opts.record_cap = 2;
        let tr = propagate_with(&pair, &sched, 500.0, &opts).unwrap();
        assert!((tr.final_state().unwrap().norm() - 1.0).abs() < 1e-9);
    }
}
