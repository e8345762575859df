//! Schedule functions `s ↦ u(s)`: linear, gap-adapted power law and the
//! boundary-cancellation bump.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, numeric, Result};
use crate::gap::{gap_power_integral_over, GapProfile};
use crate::interp::{hermite, limit_monotone_slopes, locate, MonotoneCubic};
use crate::quad;

/// Default power-law exponent.
pub const DEFAULT_EXPONENT: f64 = 1.5;
/// Relative tolerance of [`normalization_constant`].
pub const NORMALIZATION_RTOL: f64 = 1e-10;
/// Tolerance on the boundary values `u(0) = 0`, `u(1) = 1`.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Smallest node count accepted by the synthesized families.
pub const MIN_SYNTH_GRID: usize = 65;

const CELL_RTOL: f64 = 1e-13;
const NEWTON_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScheduleFamily {
    Linear,
    /// `u′ = c_p·Δ(u)^p`.
    PowerLaw { p: f64, c_p: f64 },
    /// `u(s) = c_e⁻¹ ∫₀ˢ exp(−1/(t(1−t))) dt`.
    BoundaryCancellation { c_e: f64 },
}

impl ScheduleFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleFamily::Linear => "linear",
            ScheduleFamily::PowerLaw { .. } => "power_law",
            ScheduleFamily::BoundaryCancellation { .. } => "boundary_cancellation",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            ScheduleFamily::PowerLaw { p, .. } => Some(p),
            _ => None,
        }
    }
}

/// `(s, u, u′, u″)` at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleNode {
    pub s: f64,
    pub u: f64,
    pub du: f64,
    pub ddu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    family: ScheduleFamily,
    nodes: Vec<ScheduleNode>,
    s: Vec<f64>,
    /// Limited slopes for the monotone interpolation of `u`.
    u_slopes: Vec<f64>,
}

impl Schedule {
    /// Validate nodes and build the interpolant.
    ///
    /// `u` must be strictly increasing with `u′ > 0`, except for the
    /// boundary-cancellation family whose derivative underflows to zero near
    /// both ends; there `u` only has to be non-decreasing with `u′ ≥ 0`.
    pub fn from_nodes(family: ScheduleFamily, nodes: Vec<ScheduleNode>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(domain("a schedule needs at least two nodes"));
        }
        if nodes.iter().any(|n| !(n.s.is_finite() && n.u.is_finite() && n.du.is_finite() && n.ddu.is_finite())) {
            return Err(domain("schedule nodes must be finite"));
        }
        let first = nodes[0];
        let last = nodes[nodes.len() - 1];
        if first.s != 0.0 || last.s != 1.0 {
            return Err(domain(format!("schedule nodes must span s in [0, 1], got [{}, {}]", first.s, last.s)));
        }
        if first.u.abs() > BOUNDARY_TOL || (last.u - 1.0).abs() > BOUNDARY_TOL {
            return Err(domain(format!("schedule must satisfy u(0) = 0 and u(1) = 1, got {} and {}", first.u, last.u)));
        }
        if nodes.windows(2).any(|w| !(w[1].s > w[0].s)) {
            return Err(domain("schedule nodes must be strictly increasing in s"));
        }
        let relaxed = matches!(family, ScheduleFamily::BoundaryCancellation { .. });
        for (i, w) in nodes.windows(2).enumerate() {
            let ok = if relaxed { w[1].u >= w[0].u } else { w[1].u > w[0].u };
            if !ok {
                return Err(numeric(format!("schedule is not increasing between nodes {i} and {}", i + 1), w[1].u - w[0].u));
            }
        }
        if let Some(n) = nodes.iter().find(|n| if relaxed { n.du < 0.0 } else { !(n.du > 0.0) }) {
            return Err(numeric(format!("schedule derivative is not positive at s = {}", n.s), n.du));
        }
        let s: Vec<f64> = nodes.iter().map(|n| n.s).collect();
        let u: Vec<f64> = nodes.iter().map(|n| n.u).collect();
        let mut u_slopes: Vec<f64> = nodes.iter().map(|n| n.du).collect();
        limit_monotone_slopes(&s, &u, &mut u_slopes);
        Ok(Self {
            family,
            nodes,
            s,
            u_slopes,
        })
    }

    pub fn family(&self) -> &ScheduleFamily {
        &self.family
    }

    pub fn nodes(&self) -> &[ScheduleNode] {
        &self.nodes
    }

    pub fn interpolation_order(&self) -> usize {
        3
    }

    /// `(u′(0), u′(1))`.
    pub fn boundary_derivatives(&self) -> (f64, f64) {
        (self.nodes[0].du, self.nodes[self.nodes.len() - 1].du)
    }

    /// Node abscissae, in increasing order.
    pub fn s_nodes(&self) -> &[f64] {
        &self.s
    }

    /// `(u, u′, u″)` at `s`, without range checking (`s` is clamped).
    pub fn eval_clamped(&self, s: f64) -> (f64, f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let i = locate(&self.s, s);
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let (u, _) = hermite(a.s, b.s, a.u, b.u, self.u_slopes[i], self.u_slopes[i + 1], s);
        let (du, _) = hermite(a.s, b.s, a.du, b.du, a.ddu, b.ddu, s);
        let t = (s - a.s) / (b.s - a.s);
        let ddu = if t == 0.0 { a.ddu } else { a.ddu + t * (b.ddu - a.ddu) };
        (u, du, ddu)
    }
}

/// Whether `p` lies in the open interval `(1, 2)` covered by the theory.
pub fn exponent_in_range(p: f64) -> bool {
    p > 1.0 && p < 2.0
}

/// `c_p = ∫₀¹ Δ(u)^(−p) du`.
///
/// Exponents outside `(1, 2)` are accepted; callers decide whether to warn.
pub fn normalization_constant(profile: &GapProfile, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("power-law exponent must be positive and finite, got {p}")));
    }
    gap_power_integral_over(profile, p, 0.0, 1.0, NORMALIZATION_RTOL)
}

pub fn linear_schedule(grid_points: usize) -> Result<Schedule> {
    if grid_points < 2 {
        return Err(domain("a schedule needs at least two nodes"));
    }
    let nodes = uniform(grid_points)
        .map(|s| ScheduleNode { s, u: s, du: 1.0, ddu: 0.0 })
        .collect();
    Schedule::from_nodes(ScheduleFamily::Linear, nodes)
}

fn uniform(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| if i + 1 == points { 1.0 } else { i as f64 / (points - 1) as f64 })
}

/// Power-law schedule `u′ = c_p Δ^p` by inversion of
/// `s(u) = c_p⁻¹ ∫₀ᵘ Δ^(−p)` onto a uniform s-grid.
pub fn synthesize_power_law(profile: &GapProfile, p: f64, grid_points: usize) -> Result<Schedule> {
    if grid_points < MIN_SYNTH_GRID {
        return Err(domain(format!("power-law synthesis needs at least {MIN_SYNTH_GRID} nodes, got {grid_points}")));
    }
    let c_p = normalization_constant(profile, p)?;
    let integrand = |u: f64| libm::pow(profile.delta(u), -p);

    // Cumulative s(u) on a fine u-grid, seeded with the profile breakpoints.
    let cells = (4 * grid_points).max(1025);
    let mut ugrid: Vec<f64> = uniform(cells + 1).chain(profile.breakpoints()).collect();
    ugrid.sort_by(|a, b| a.total_cmp(b));
    ugrid.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut cumulative = Vec::with_capacity(ugrid.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for w in ugrid.windows(2) {
        acc += quad::integrate(integrand, w[0], w[1], CELL_RTOL, 0.0)?.value;
        cumulative.push(acc);
    }
    let total = acc;
    if !(total > 0.0) || !total.is_finite() {
        return Err(numeric("power-law normalization is not positive", total));
    }
    let svals: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    let slopes: Vec<f64> = ugrid.iter().map(|&u| total / integrand(u)).collect();
    let guess = MonotoneCubic::with_slopes(svals.clone(), ugrid.clone(), slopes)?;

    let mut nodes = Vec::with_capacity(grid_points);
    for s in uniform(grid_points) {
        let u = if s == 0.0 {
            0.0
        } else if s == 1.0 {
            1.0
        } else {
            let k = locate(&svals, s);
            let (lo, hi) = (ugrid[k], ugrid[k + 1]);
            let target = (s - svals[k]) * total;
            let x0 = guess.eval(s).0.clamp(lo, hi);
            newton_invert(|x| integrand(x), lo, hi, target, x0)?
        };
        let (d, d1, _) = profile.eval3(u);
        let du = c_p * libm::pow(d, p);
        let ddu = p * c_p * c_p * libm::pow(d, 2.0 * p - 1.0) * d1;
        nodes.push(ScheduleNode { s, u, du, ddu });
    }
    Schedule::from_nodes(ScheduleFamily::PowerLaw { p, c_p }, nodes)
}

/// Solve `∫_lo^x f = target` for `x ∈ [lo, hi]` with `f > 0`, by Newton steps
/// safeguarded with bisection.
fn newton_invert(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, target: f64, x0: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut x = x0;
    for _ in 0..100 {
        let g = quad::integrate(f, lo, x, CELL_RTOL, 0.0)?.value - target;
        if g > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let fx = f(x);
        let mut next = x - g / fx;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= NEWTON_TOL * (1.0 + x.abs()) || b - a <= NEWTON_TOL {
            return Ok(next);
        }
        x = next;
    }
    Err(numeric("schedule inversion did not converge", b - a))
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        libm::exp(-1.0 / (t * (1.0 - t)))
    }
}

fn bump_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let q = t * (1.0 - t);
        bump(t) * (1.0 - 2.0 * t) / (q * q)
    }
}

/// `c_e = ∫₀¹ exp(−1/(t(1−t))) dt`.
pub fn bump_normalization() -> Result<f64> {
    Ok(quad::integrate_breaks(bump, &[0.0, 0.5, 1.0], 1e-13, 0.0)?.value)
}

pub fn boundary_cancellation_schedule(grid_points: usize) -> Result<Schedule> {
    if grid_points < MIN_SYNTH_GRID {
        return Err(domain(format!(
            "boundary-cancellation schedule needs at least {MIN_SYNTH_GRID} nodes, got {grid_points}"
        )));
    }
    let c_e = bump_normalization()?;
    let s: Vec<f64> = uniform(grid_points).collect();
    // Accumulate from the nearer end so both halves keep full relative precision.
    let mut left = alloc::vec![0.0; grid_points];
    for i in 1..grid_points {
        left[i] = left[i - 1] + quad::integrate(bump, s[i - 1], s[i], CELL_RTOL, 0.0)?.value;
    }
    let mut right = alloc::vec![0.0; grid_points];
    for i in (0..grid_points - 1).rev() {
        right[i] = right[i + 1] + quad::integrate(bump, s[i], s[i + 1], CELL_RTOL, 0.0)?.value;
    }
    let nodes = s
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let u = if t == 0.5 {
                0.5
            } else if t < 0.5 {
                left[i] / c_e
            } else {
                1.0 - right[i] / c_e
            };
            ScheduleNode {
                s: t,
                u,
                du: bump(t) / c_e,
                ddu: bump_derivative(t) / c_e,
            }
        })
        .collect();
    Schedule::from_nodes(ScheduleFamily::BoundaryCancellation { c_e }, nodes)
}

/// `(u, u′, u″)` at `s ∈ [0, 1]`; exact at the nodes.
pub fn schedule_eval(sched: &Schedule, s: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("schedule parameter s = {s} outside [0, 1]")));
    }
    Ok(sched.eval_clamped(s))
}

/// `max_i |u′(sᵢ) − c_p Δ(u(sᵢ))^p| / c_p` over the nodes of a power-law schedule.
pub fn power_law_node_residual(sched: &Schedule, profile: &GapProfile) -> Option<f64> {
    let ScheduleFamily::PowerLaw { p, c_p } = *sched.family() else {
        return None;
    };
    Some(
        sched
            .nodes()
            .iter()
            .map(|n| (n.du - c_p * libm::pow(profile.delta(n.u), p)).abs() / c_p)
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riemann(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        // Composite midpoint rule.
        let h = 1.0 / n as f64;
        (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn normalization_examples() {
        let c = GapProfile::constant(1.0).unwrap();
        for p in [1.2, 1.5, 1.8] {
            assert!((normalization_constant(&c, p).unwrap() - 1.0).abs() < 1e-14);
        }
        let l = GapProfile::linear_condition(2.0).unwrap();
        let v = normalization_constant(&l, 1.5).unwrap();
        assert!((v - 4.0 * (2f64.sqrt() - 1.0)).abs() < 1e-10 * v);
        let g = GapProfile::grover(4).unwrap();
        let v = normalization_constant(&g, 1.5).unwrap();
        let oracle = riemann(|u| g.delta(u).powf(-1.5), 1_000_000);
        assert!(((v - oracle) / oracle).abs() < 1e-7, "{v} {oracle}");
    }

    #[test]
    fn normalization_closed_form_for_linear_family() {
        for kappa in [2.0, 4.0, 8.0, 64.0] {
            let l = GapProfile::linear_condition(kappa).unwrap();
            for p in [1.2, 1.5, 1.8] {
                let exact = (libm::pow(kappa, p - 1.0) - 1.0) * kappa / ((kappa - 1.0) * (p - 1.0));
                let v = normalization_constant(&l, p).unwrap();
                assert!(((v - exact) / exact).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_schedule_examples() {
        let s = linear_schedule(101).unwrap();
        let n = s.nodes()[37];
        assert!((n.s - 0.37).abs() < 1e-15 && n.u == n.s);
        assert!(s.nodes().iter().all(|n| n.du == 1.0 && n.ddu == 0.0));
        assert_eq!(schedule_eval(&s, 0.25).unwrap(), (0.25, 1.0, 0.0));
        assert!(schedule_eval(&s, 1.5).is_err());
        assert!(schedule_eval(&s, -0.1).is_err());
        assert!(linear_schedule(1).is_err());
    }

    #[test]
    fn power_law_on_constant_gap_is_linear() {
        let c = GapProfile::constant(1.0).unwrap();
        let s = synthesize_power_law(&c, 1.5, 129).unwrap();
        for n in s.nodes() {
            assert!((n.u - n.s).abs() <= 1e-10);
            assert_eq!(n.ddu, 0.0);
        }
        let (u, du, ddu) = schedule_eval(&s, 0.8).unwrap();
        assert!((u - 0.8).abs() < 1e-9 && (du - 1.0).abs() < 1e-9 && ddu.abs() < 1e-9);
    }

    #[test]
    fn power_law_on_linear_gap_matches_closed_form() {
        let l = GapProfile::linear(-0.5, 1.0).unwrap();
        let sched = synthesize_power_law(&l, 1.5, 257).unwrap();
        let c = 4.0 * (2f64.sqrt() - 1.0);
        let exact = |s: f64| 2.0 * (1.0 - 1.0 / ((1.0 + c * s / 4.0) * (1.0 + c * s / 4.0)));
        for n in sched.nodes() {
            assert!((n.u - exact(n.s)).abs() < 1e-8, "{} {}", n.u, exact(n.s));
        }
        assert!(power_law_node_residual(&sched, &l).unwrap() <= 1e-7);
    }

    #[test]
    fn power_law_grover_is_symmetric() {
        let g = GapProfile::grover(16).unwrap();
        let sched = synthesize_power_law(&g, 1.5, 129).unwrap();
        let mid = sched.nodes()[64];
        assert_eq!(mid.s, 0.5);
        assert!((mid.u - 0.5).abs() < 1e-8);
        for (a, b) in sched.nodes().iter().zip(sched.nodes().iter().rev()) {
            assert!((a.u + b.u - 1.0).abs() < 1e-8);
        }
        // Slower where the gap is small.
        assert!(mid.du < sched.nodes()[0].du);
        assert!(power_law_node_residual(&sched, &g).unwrap() <= 1e-7);
    }

    #[test]
    fn inversion_is_consistent() {
        let g = GapProfile::grover(64).unwrap();
        let p = 1.5;
        let sched = synthesize_power_law(&g, p, 257).unwrap();
        let c_p = normalization_constant(&g, p).unwrap();
        for k in 0..=2000 {
            let s = k as f64 / 2000.0;
            let (u, _, _) = schedule_eval(&sched, s).unwrap();
            let back = gap_power_integral_over(&g, p, 0.0, u, 1e-12).unwrap() / c_p;
            assert!((back - s).abs() < 1e-8, "s={s} back={back}");
        }
    }

    #[test]
    fn eval_is_exact_at_nodes() {
        let g = GapProfile::grover(4).unwrap();
        let sched = synthesize_power_law(&g, 1.5, 65).unwrap();
        for n in sched.nodes() {
            assert_eq!(schedule_eval(&sched, n.s).unwrap(), (n.u, n.du, n.ddu));
        }
    }

    fn ode_residual(grid: usize) -> f64 {
        let g = GapProfile::grover(16).unwrap();
        let sched = synthesize_power_law(&g, 1.5, grid).unwrap();
        let ScheduleFamily::PowerLaw { p, c_p } = *sched.family() else { unreachable!() };
        let fine = 10 * (grid - 1);
        (0..=fine)
            .map(|k| {
                let (u, du, _) = sched.eval_clamped(k as f64 / fine as f64);
                (du - c_p * g.delta(u).powf(p)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn ode_residual_converges() {
        let r1 = ode_residual(65);
        let r2 = ode_residual(129);
        let r3 = ode_residual(257);
        assert!(r2 < r1 / 4.0 && r3 < r2 / 4.0, "{r1} {r2} {r3}");
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let g = GapProfile::grover(16).unwrap();
        let err = |grid: usize| {
            let sched = synthesize_power_law(&g, 1.5, grid).unwrap();
            let n = sched.nodes();
            let h = 1.0 / (grid - 1) as f64;
            (1..grid - 1)
                .map(|i| ((n[i + 1].u - 2.0 * n[i].u + n[i - 1].u) / (h * h) - n[i].ddu).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(129), err(257));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn boundary_cancellation_examples() {
        let sched = boundary_cancellation_schedule(129).unwrap();
        let n = sched.nodes();
        assert_eq!(n[0].u, 0.0);
        assert_eq!(n[128].u, 1.0);
        assert!((n[64].u - 0.5).abs() < 1e-9);
        assert_eq!(sched.boundary_derivatives(), (0.0, 0.0));
        let ScheduleFamily::BoundaryCancellation { c_e } = *sched.family() else { unreachable!() };
        let oracle = riemann(bump, 10_000_000);
        assert!(((c_e - oracle) / oracle).abs() < 1e-8, "{c_e} {oracle}");
        assert!(boundary_cancellation_schedule(64).is_err());
        // Derivatives of u match finite differences of the node values.
        let h = 1.0 / 128.0;
        for i in 1..128 {
            let fd = (n[i + 1].u - n[i - 1].u) / (2.0 * h);
            assert!((fd - n[i].du).abs() < 1e-2 * n[64].du);
        }
    }

    #[test]
    fn from_nodes_rejects_bad_input() {
        let node = |s: f64, u: f64| ScheduleNode { s, u, du: 1.0, ddu: 0.0 };
        assert!(Schedule::from_nodes(ScheduleFamily::Linear, alloc::vec![node(0.0, 0.0), node(1.0, 0.9)]).is_err());
        assert!(Schedule::from_nodes(
            ScheduleFamily::Linear,
            alloc::vec![node(0.0, 0.0), node(0.5, 0.6), node(0.6, 0.6), node(1.0, 1.0)]
        )
        .is_err());
        let mut flat = alloc::vec![node(0.0, 0.0), node(1.0, 1.0)];
        flat[0].du = 0.0;
        assert!(Schedule::from_nodes(ScheduleFamily::Linear, flat).is_err());
    }

    #[test]
    fn power_law_grid_precondition() {
        let g = GapProfile::grover(4).unwrap();
        assert!(synthesize_power_law(&g, 1.5, 64).is_err());
        assert!(exponent_in_range(1.5) && !exponent_in_range(2.0) && !exponent_in_range(1.0));
        // Out-of-range exponents are still synthesized.
        assert!(synthesize_power_law(&g, 2.0, 65).is_ok());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn power_law_invariants(n in 2u64..2048, p in 1.05f64..1.95) {
            let g = GapProfile::grover(n).unwrap();
            let sched = synthesize_power_law(&g, p, 65).unwrap();
            let nodes = sched.nodes();
            proptest::prop_assert!(nodes[0].u.abs() <= 1e-10 && (nodes[64].u - 1.0).abs() <= 1e-10);
            proptest::prop_assert!(nodes.windows(2).all(|w| w[1].u > w[0].u));
            proptest::prop_assert!(power_law_node_residual(&sched, &g).unwrap() <= 1e-7);
        }

        #[test]
        fn c_p_bound_holds(kappa in 1.5f64..100.0, p in 1.1f64..1.9) {
            let l = GapProfile::linear_condition(kappa).unwrap();
            let c_hat = crate::gap::estimate_measure_constant(&l, 128).unwrap().constant_hat;
            let c_p = normalization_constant(&l, p).unwrap();
            let bound = crate::gap::gap_integral_bound(c_hat, p, l.min_gap());
            proptest::prop_assert!(c_p <= bound * 1.02);
        }
    }
}
