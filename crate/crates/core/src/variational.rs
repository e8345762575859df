//! Euler–Lagrange residuals of the error functional
//! `I[u] = ∫ A·|u″|/Δ² + A²·u′²/Δ³ ds` and of its two components.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bounds::integral_terms;
use crate::error::{domain, Result};
use crate::gap::{GapKind, GapProfile};
use crate::schedule::{Schedule, ScheduleFamily};

/// Relative dead-band of `sgn(u″)`, in units of `c_p²`.
pub const SIGN_DEADBAND: f64 = 1e-12;
/// Cells on either side of a kink left out of the residual norm.
pub const KINK_EXCLUSION_CELLS: usize = 2;

/// Pointwise schedule and gap data at one grid point.
#[derive(Debug, Clone, Copy)]
struct Point {
    u1: f64,
    u2: f64,
    d: f64,
    d1: f64,
    d2: f64,
    sgn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ELResidualReport {
    pub s_grid: Vec<f64>,
    pub full_residual: Vec<f64>,
    pub l1_residual: Vec<f64>,
    pub l2_residual: Vec<f64>,
    /// `max(1, A/Δ⁴)` at each point.
    pub scale: Vec<f64>,
    /// `sgn(u″)` used at each point.
    pub branch: Vec<i8>,
    /// Points left out of the norm (near kinks of piecewise-linear gaps).
    pub excluded: Vec<bool>,
    /// Trapezoidal discrete L² norm of the full residual over included points.
    pub l2_norm_full: f64,
    pub schedule_family: ScheduleFamily,
    pub gap_kind: GapKind,
    pub a_norm: f64,
}

impl ELResidualReport {
    pub fn max_scale(&self) -> f64 {
        self.scale.iter().copied().fold(0.0, f64::max)
    }

    /// `max |r|` over included points.
    pub fn max_abs(values: &[f64], excluded: &[bool]) -> f64 {
        values
            .iter()
            .zip(excluded)
            .filter(|(_, &x)| !x)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

fn sign_scale(sched: &Schedule) -> f64 {
    match *sched.family() {
        ScheduleFamily::PowerLaw { c_p, .. } => c_p * c_p,
        _ => 1.0,
    }
}

fn check_inputs(profile: &GapProfile, grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(domain("residual grid needs at least two points"));
    }
    if !profile.has_second_derivative() {
        return Err(domain("profile has too few samples for a second derivative"));
    }
    Ok(())
}

fn uniform(grid: usize) -> impl Iterator<Item = f64> {
    (0..grid).map(move |i| if i + 1 == grid { 1.0 } else { i as f64 / (grid - 1) as f64 })
}

fn sample(sched: &Schedule, profile: &GapProfile, s: f64, band: f64) -> Point {
    let (u, u1, u2) = sched.eval_clamped(s);
    let (d, d1, d2) = profile.eval3(u);
    let sgn = if u2 > band {
        1.0
    } else if u2 < -band {
        -1.0
    } else {
        0.0
    };
    Point { u1, u2, d, d1, d2, sgn }
}

fn full_at(a: f64, p: &Point) -> f64 {
    let d3 = p.d * p.d * p.d;
    let d4 = d3 * p.d;
    let v2 = p.u1 * p.u1;
    -2.0 * p.u2.abs() * p.d1 / d3 + 3.0 * a * v2 * p.d1 / d4 - 2.0 * a * p.u2 / d3 + 6.0 * p.sgn * p.d1 * p.d1 * v2 / d4
        - 2.0 * p.sgn * p.d2 * v2 / d3
        - 2.0 * p.sgn * p.d1 * p.u2 / d3
}

fn l1_at(p: &Point) -> f64 {
    let d3 = p.d * p.d * p.d;
    let d4 = d3 * p.d;
    let v2 = p.u1 * p.u1;
    -2.0 * p.u2 * p.d1 / d3 + 6.0 * p.d1 * p.d1 * v2 / d4 - 2.0 * p.d2 * v2 / d3 - 2.0 * p.d1 * p.u2 / d3
}

fn l2_at(p: &Point) -> f64 {
    2.0 * p.d * p.u2 - 3.0 * p.u1 * p.u1 * p.d1
}

/// Full residual at a single `s`.
pub fn el_full_residual_at(sched: &Schedule, profile: &GapProfile, a_norm: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("s = {s} outside [0, 1]")));
    }
    let p = sample(sched, profile, s, SIGN_DEADBAND * sign_scale(sched));
    Ok(full_at(a_norm, &p))
}

pub fn el_full_residual(sched: &Schedule, profile: &GapProfile, a_norm: f64, grid: usize) -> Result<ELResidualReport> {
    check_inputs(profile, grid)?;
    let band = SIGN_DEADBAND * sign_scale(sched);
    let s_grid: Vec<f64> = uniform(grid).collect();
    let points: Vec<Point> = s_grid.iter().map(|&s| sample(sched, profile, s, band)).collect();
    let full_residual: Vec<f64> = points.iter().map(|p| full_at(a_norm, p)).collect();
    let excluded = kink_exclusions(sched, profile, &s_grid);
    let h = 1.0 / (grid - 1) as f64;
    let sum: f64 = full_residual
        .iter()
        .zip(&excluded)
        .enumerate()
        .filter(|(_, (_, &x))| !x)
        .map(|(i, (r, _))| {
            let w = if i == 0 || i + 1 == grid { 0.5 * h } else { h };
            w * r * r
        })
        .sum();
    Ok(ELResidualReport {
        l1_residual: points.iter().map(l1_at).collect(),
        l2_residual: points.iter().map(l2_at).collect(),
        scale: points.iter().map(|p| (a_norm / (p.d * p.d * p.d * p.d)).max(1.0)).collect(),
        branch: points.iter().map(|p| p.sgn as i8).collect(),
        excluded,
        l2_norm_full: libm::sqrt(sum),
        full_residual,
        s_grid,
        schedule_family: *sched.family(),
        gap_kind: profile.kind().clone(),
        a_norm,
    })
}

/// Residual of the `|u″|/Δ²` component on the `u″ ≥ 0` branch.
pub fn l1_residual(sched: &Schedule, profile: &GapProfile, grid: usize) -> Result<Vec<f64>> {
    check_inputs(profile, grid)?;
    Ok(uniform(grid).map(|s| l1_at(&sample(sched, profile, s, 0.0))).collect())
}

/// `2Δu″ − 3u′²Δ′`.
pub fn l2_residual(sched: &Schedule, profile: &GapProfile, grid: usize) -> Result<Vec<f64>> {
    check_inputs(profile, grid)?;
    Ok(uniform(grid).map(|s| l2_at(&sample(sched, profile, s, 0.0))).collect())
}

/// Grid points within [`KINK_EXCLUSION_CELLS`] cells of a kink of the gap.
pub fn kink_exclusions(sched: &Schedule, profile: &GapProfile, s_grid: &[f64]) -> Vec<bool> {
    let mut excluded = alloc::vec![false; s_grid.len()];
    let kinks = profile.kinks();
    if kinks.is_empty() {
        return excluded;
    }
    let us: Vec<f64> = s_grid.iter().map(|&s| sched.eval_clamped(s).0).collect();
    for k in kinks {
        let i = us.partition_point(|&u| u < k);
        let lo = i.saturating_sub(KINK_EXCLUSION_CELLS + 1);
        let hi = (i + KINK_EXCLUSION_CELLS).min(s_grid.len() - 1);
        for flag in &mut excluded[lo..=hi] {
            *flag = true;
        }
    }
    excluded
}

/// `I[u]` for two schedules on the same profile.
pub fn compare_functionals(sched_a: &Schedule, sched_b: &Schedule, profile: &GapProfile, a_norm: f64) -> Result<(f64, f64)> {
    Ok((functional(sched_a, profile, a_norm)?, functional(sched_b, profile, a_norm)?))
}

pub fn functional(sched: &Schedule, profile: &GapProfile, a_norm: f64) -> Result<f64> {
    let (second, first) = integral_terms(a_norm, profile, sched, 0.0, 1.0)?;
    Ok(second + first)
}
