//! Spectral-gap profiles `u ↦ Δ(u)`: closed forms, tabulations, the
//! sublevel-measure constant, piecewise-linear lower bounds and gap-power
//! integrals.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interp::CubicSpline;
use crate::operators::{eigenvalues, interpolate_unchecked, HamiltonianPair};
use crate::quad;

/// Gaps below this are treated as level crossings.
pub const LEVEL_CROSSING_TOL: f64 = 1e-12;
/// Default u-resolution of the sublevel-measure estimator.
pub const DEFAULT_MEASURE_RESOLUTION: usize = 4096;
/// Dead-band on `Δ″` when looking for inflection points.
pub const INFLECTION_DEADBAND: f64 = 1e-8;
/// Refuse to build a lower bound for profiles with more inflections than this.
pub const MAX_INFLECTIONS: usize = 64;
/// Relative tolerance of [`gap_power_integral`].
pub const GAP_INTEGRAL_RTOL: f64 = 1e-8;

const GOLDEN_TOL: f64 = 1e-10;
const PL_DETECTION_POINTS: usize = 4097;
const PL_POINTS_PER_PIECE: usize = 9;

/// Closed-form description of a profile, as stored in config documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapKind {
    /// `Δ(u) = √((1 − 2u)² + 4u(1 − u)/N)`.
    Grover {
        #[serde(rename = "N")]
        n: u64,
    },
    /// `Δ(u) = α·u + β`.
    Linear { alpha: f64, beta: f64 },
    /// Clamped cubic spline through samples.
    Tabulated,
    /// Linear interpolation between knots.
    PiecewiseLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    kind: GapKind,
    samples: Vec<(f64, f64)>,
    spline: Option<CubicSpline>,
    min_gap: f64,
    argmin: f64,
    max_gap: f64,
}

impl GapProfile {
    pub fn grover(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("Grover profile needs N >= 2, got {n}")));
        }
        Ok(Self {
            kind: GapKind::Grover { n },
            samples: Vec::new(),
            spline: None,
            min_gap: libm::sqrt(1.0 / n as f64),
            argmin: 0.5,
            max_gap: 1.0,
        })
    }

    pub fn linear(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(domain("linear profile coefficients must be finite"));
        }
        let (d0, d1) = (beta, alpha + beta);
        if !(d0 > 0.0 && d1 > 0.0) {
            return Err(domain(format!("linear profile must stay positive: Δ(0) = {d0}, Δ(1) = {d1}")));
        }
        let (min_gap, argmin) = if d1 < d0 { (d1, 1.0) } else { (d0, 0.0) };
        Ok(Self {
            kind: GapKind::Linear { alpha, beta },
            samples: Vec::new(),
            spline: None,
            min_gap,
            argmin,
            max_gap: d0.max(d1),
        })
    }

    /// `Δ(u) = 1 − u + u/κ`, the linear-system lower bound.
    pub fn linear_condition(kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(domain(format!("condition number must be >= 1, got {kappa}")));
        }
        Self::linear(1.0 / kappa - 1.0, 1.0)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::linear(0.0, value)
    }

    /// Cubic-spline profile through `(u, Δ)` samples covering `[0, 1]`.
    /// Fewer than four samples fall back to linear interpolation without
    /// curvature information.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        validate_samples(&samples)?;
        let spline = if samples.len() >= 4 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
            Some(CubicSpline::new(xs, ys)?)
        } else {
            None
        };
        let mut profile = Self {
            kind: GapKind::Tabulated,
            samples,
            spline,
            min_gap: 0.0,
            argmin: 0.0,
            max_gap: 0.0,
        };
        let (argmin, min_gap) = profile.refine_sample_minimum(|u| profile.delta(u));
        profile.argmin = argmin;
        profile.min_gap = min_gap;
        profile.max_gap = profile.samples.iter().fold(0.0f64, |m, s| m.max(s.1));
        if !(profile.min_gap > 0.0) {
            return Err(Error::DegenerateGap {
                u: argmin,
                gap: profile.min_gap,
            });
        }
        Ok(profile)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        validate_samples(&knots)?;
        let (argmin, min_gap) = knots
            .iter()
            .copied()
            .fold((0.0, f64::INFINITY), |best, k| if k.1 < best.1 { k } else { best });
        let max_gap = knots.iter().fold(0.0f64, |m, k| m.max(k.1));
        Ok(Self {
            kind: GapKind::PiecewiseLinear,
            samples: knots,
            spline: None,
            min_gap,
            argmin,
            max_gap,
        })
    }

    /// Rebuild a profile from its serialized closed-form description.
    pub fn from_kind(kind: &GapKind) -> Result<Self> {
        match *kind {
            GapKind::Grover { n } => Self::grover(n),
            GapKind::Linear { alpha, beta } => Self::linear(alpha, beta),
            GapKind::Tabulated | GapKind::PiecewiseLinear => {
                Err(domain("tabulated profiles are rebuilt from their samples"))
            }
        }
    }

    pub fn kind(&self) -> &GapKind {
        &self.kind
    }

    /// Samples (tabulated) or knots (piecewise-linear); empty for closed forms.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// `Δ* = inf Δ`.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Location of the minimum.
    pub fn argmin(&self) -> f64 {
        self.argmin
    }

    pub fn max_gap(&self) -> f64 {
        self.max_gap
    }

    pub fn is_constant(&self) -> bool {
        self.max_gap - self.min_gap <= 1e-15 * self.max_gap
    }

    /// Whether `Δ″` is available (always, except for sparse tabulations).
    pub fn has_second_derivative(&self) -> bool {
        !matches!(self.kind, GapKind::Tabulated) || self.spline.is_some()
    }

    pub fn delta(&self, u: f64) -> f64 {
        self.eval3(u).0
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.eval3(u).1
    }

    pub fn d2(&self, u: f64) -> f64 {
        self.eval3(u).2
    }

    /// `(Δ, Δ′, Δ″)` at `u`, derivatives with respect to `u`.
    pub fn eval3(&self, u: f64) -> (f64, f64, f64) {
        match self.kind {
            GapKind::Grover { n } => {
                let a = 1.0 - 1.0 / n as f64;
                let b = 1.0 / n as f64;
                let t = 1.0 - 2.0 * u;
                let d = libm::sqrt(a * t * t + b);
                (d, -2.0 * a * t / d, 4.0 * a * b / (d * d * d))
            }
            GapKind::Linear { alpha, beta } => (alpha * u + beta, alpha, 0.0),
            GapKind::Tabulated => {
                let u = u.clamp(0.0, 1.0);
                match &self.spline {
                    Some(s) => s.eval3(u),
                    None => linear_eval(&self.samples, u),
                }
            }
            GapKind::PiecewiseLinear => linear_eval(&self.samples, u.clamp(0.0, 1.0)),
        }
    }

    /// Interior points where the profile has kinks or narrow features;
    /// quadrature panels are seeded there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            GapKind::Grover { n } => {
                let w = libm::sqrt(1.0 / n as f64);
                [0.5 - 4.0 * w, 0.5 - w, 0.5, 0.5 + w, 0.5 + 4.0 * w]
                    .into_iter()
                    .filter(|&x| x > 0.0 && x < 1.0)
                    .collect()
            }
            GapKind::Linear { .. } => Vec::new(),
            GapKind::Tabulated | GapKind::PiecewiseLinear => {
                self.samples.iter().map(|s| s.0).filter(|&x| x > 0.0 && x < 1.0).collect()
            }
        }
    }

    /// Interior knots of a piecewise-linear profile, where `Δ′` jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self.kind {
            GapKind::PiecewiseLinear => self.samples[1..self.samples.len() - 1].iter().map(|k| k.0).collect(),
            _ => Vec::new(),
        }
    }

    /// `Δ` on a uniform grid of `points` nodes.
    pub fn tabulate(&self, points: usize) -> Vec<(f64, f64)> {
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let u = i as f64 / (points - 1) as f64;
                (u, self.delta(u))
            })
            .collect()
    }

    fn refine_sample_minimum(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let k = self
            .samples
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if s.1 < self.samples[best].1 { i } else { best });
        let lo = self.samples[k.saturating_sub(1)].0;
        let hi = self.samples[(k + 1).min(self.samples.len() - 1)].0;
        let (x, fx) = golden_section(&f, lo, hi, GOLDEN_TOL);
        if fx < self.samples[k].1 {
            (x, fx)
        } else {
            self.samples[k]
        }
    }
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(domain("a tabulated profile needs at least two samples"));
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) {
        return Err(domain("profile samples must be finite"));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(domain("profile samples must be strictly increasing in u"));
    }
    let (first, last) = (samples[0].0, samples[samples.len() - 1].0);
    if first != 0.0 || last != 1.0 {
        return Err(domain(format!("profile samples must span [0, 1], got [{first}, {last}]")));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.1 > 0.0)) {
        return Err(Error::DegenerateGap { u: bad.0, gap: bad.1 });
    }
    Ok(())
}

fn linear_eval(knots: &[(f64, f64)], u: f64) -> (f64, f64, f64) {
    let i = locate_pairs(knots, u);
    let (x0, y0) = knots[i];
    let (x1, y1) = knots[i + 1];
    let slope = (y1 - y0) / (x1 - x0);
    (y0 + slope * (u - x0), slope, 0.0)
}

fn locate_pairs(knots: &[(f64, f64)], u: f64) -> usize {
    let last = knots.len() - 2;
    match knots.binary_search_by(|k| k.0.total_cmp(&u)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, p| if p.1 < best.1 { p } else { best })
}

/// Tabulate `λ₂(u) − λ₁(u)` of a pair on a uniform grid, refining the minimum
/// by golden-section search on the pair itself.
pub fn profile_from_pair(pair: &HamiltonianPair, grid_points: usize) -> Result<GapProfile> {
    if grid_points < 2 {
        return Err(domain("profile needs at least two grid points"));
    }
    let mut samples = Vec::with_capacity(grid_points);
    for i in 0..grid_points {
        let u = i as f64 / (grid_points - 1) as f64;
        let ev = eigenvalues(&interpolate_unchecked(pair, u))?;
        let gap = ev[1] - ev[0];
        if gap < LEVEL_CROSSING_TOL {
            return Err(Error::DegenerateGap { u, gap });
        }
        samples.push((u, gap));
    }
    let mut profile = GapProfile::tabulated(samples)?;
    let pair_gap = |u: f64| {
        eigenvalues(&interpolate_unchecked(pair, u.clamp(0.0, 1.0)))
            .map(|ev| ev[1] - ev[0])
            .unwrap_or(f64::INFINITY)
    };
    let (argmin, min_gap) = profile.refine_sample_minimum(pair_gap);
    if min_gap < LEVEL_CROSSING_TOL {
        return Err(Error::DegenerateGap { u: argmin, gap: min_gap });
    }
    profile.argmin = argmin;
    profile.min_gap = min_gap;
    Ok(profile)
}

/// Estimated constant `C` of `μ({u : Δ(u) ≤ x}) ≤ C·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub constant_hat: f64,
    /// The sampled `x` attaining the maximum ratio.
    pub witness_x: f64,
    /// Number of u-cells used for the measure.
    pub grid_resolution: usize,
    pub x_grid: usize,
}

/// Lebesgue measure of sublevel sets, by trapezoidal accumulation of the
/// indicator on a uniform u-grid.
#[derive(Debug, Clone)]
pub struct SublevelMeasure {
    sorted_gaps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SublevelMeasure {
    pub fn new(profile: &GapProfile, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(domain("measure resolution must be at least 2"));
        }
        let h = 1.0 / resolution as f64;
        let mut weighted: Vec<(f64, f64)> = (0..=resolution)
            .map(|i| {
                let w = if i == 0 || i == resolution { 0.5 * h } else { h };
                (profile.delta(i as f64 * h), w)
            })
            .collect();
        weighted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let cumulative = weighted
            .iter()
            .map(|&(_, w)| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            sorted_gaps: weighted.into_iter().map(|p| p.0).collect(),
            cumulative,
        })
    }

    /// `μ({u : Δ(u) ≤ x})`.
    pub fn measure(&self, x: f64) -> f64 {
        let count = self.sorted_gaps.partition_point(|&d| d <= x);
        if count == 0 {
            0.0
        } else {
            self.cumulative[count - 1]
        }
    }
}

pub fn estimate_measure_constant(profile: &GapProfile, x_grid: usize) -> Result<MeasureEstimate> {
    estimate_measure_constant_with(profile, x_grid, DEFAULT_MEASURE_RESOLUTION)
}

/// `max μ({Δ ≤ x})/x` over `x_grid` uniformly spaced `x ∈ (Δ*, max Δ]`.
pub fn estimate_measure_constant_with(profile: &GapProfile, x_grid: usize, resolution: usize) -> Result<MeasureEstimate> {
    if x_grid < 64 {
        return Err(domain(format!("x_grid must be at least 64, got {x_grid}")));
    }
    let measure = SublevelMeasure::new(profile, resolution)?;
    let (lo, hi) = (profile.min_gap(), profile.max_gap());
    let mut best = (0.0, hi);
    if hi - lo <= 1e-15 * hi {
        best = (measure.measure(hi) / hi, hi);
    } else {
        for k in 1..=x_grid {
            let x = if k == x_grid { hi } else { lo + (hi - lo) * k as f64 / x_grid as f64 };
            let ratio = measure.measure(x) / x;
            if ratio > best.0 {
                best = (ratio, x);
            }
        }
    }
    Ok(MeasureEstimate {
        constant_hat: best.0,
        witness_x: best.1,
        grid_resolution: resolution,
        x_grid,
    })
}

/// Piecewise-linear `Δ_l ≤ Δ` with `inf Δ_l = Δ*`.
///
/// `[0, 1]` is split at inflection points and interior extrema. Convex pieces
/// get the upper envelope of tangent lines (a flat tangent at each minimum),
/// concave pieces get chords; both touch `Δ` at the piece ends so the pieces
/// join continuously.
pub fn pl_lower_bound(profile: &GapProfile) -> Result<GapProfile> {
    match profile.kind {
        GapKind::Linear { .. } | GapKind::PiecewiseLinear => return Ok(profile.clone()),
        GapKind::Tabulated if profile.samples.len() < 33 => {
            return Err(domain("piecewise-linear bound needs at least 33 samples"));
        }
        _ => {}
    }
    if !profile.has_second_derivative() {
        return Err(domain("profile has no curvature information"));
    }

    let n = PL_DETECTION_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let curv_sign: Vec<i8> = grid.iter().map(|&u| deadband_sign(profile.d2(u), INFLECTION_DEADBAND)).collect();
    let slope_sign: Vec<i8> = grid.iter().map(|&u| deadband_sign(profile.d1(u), 0.0)).collect();

    let inflections = sign_change_roots(&grid, &curv_sign, |u| profile.d2(u));
    if inflections.len() > MAX_INFLECTIONS {
        return Err(Error::Complexity {
            found: inflections.len(),
            limit: MAX_INFLECTIONS,
        });
    }
    let extrema = sign_change_roots(&grid, &slope_sign, |u| profile.d1(u));

    let mut cuts: Vec<f64> = vec![0.0];
    cuts.extend(inflections.iter().chain(extrema.iter()).copied());
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut knots: Vec<(f64, f64)> = vec![(0.0, profile.delta(0.0))];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let convex = profile.d2(0.5 * (a + b)) >= -INFLECTION_DEADBAND;
        let piece = if convex { tangent_envelope(profile, a, b) } else { chords(profile, a, b) };
        for k in piece.into_iter().skip(1) {
            if k.0 > knots[knots.len() - 1].0 + 1e-14 {
                knots.push(k);
            }
        }
    }
    let last = knots.len() - 1;
    knots[last].0 = 1.0;
    let mut bound = GapProfile::piecewise_linear(knots)?;
    // The bound touches Δ at every extremum, so its infimum is Δ*.
    if bound.min_gap > profile.min_gap {
        bound.min_gap = profile.min_gap.min(bound.min_gap);
    }
    Ok(bound)
}

fn deadband_sign(x: f64, band: f64) -> i8 {
    if x > band {
        1
    } else if x < -band {
        -1
    } else {
        0
    }
}

/// Roots of `f` located by bisection wherever the (dead-banded) sign sequence
/// flips between non-zero values.
fn sign_change_roots(grid: &[f64], signs: &[i8], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut last: Option<(usize, i8)> = None;
    for (i, &s) in signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        if let Some((j, prev)) = last {
            if prev != s {
                roots.push(bisect_root(&f, grid[j], grid[i]));
            }
        }
        last = Some((i, s));
    }
    roots
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn tangent_envelope(profile: &GapProfile, a: f64, b: f64) -> Vec<(f64, f64)> {
    let m = PL_POINTS_PER_PIECE;
    let lines: Vec<(f64, f64, f64)> = (0..m)
        .map(|j| {
            let t = if j == m - 1 { b } else { a + (b - a) * j as f64 / (m - 1) as f64 };
            let (d, d1, _) = profile.eval3(t);
            (t, d, d1)
        })
        .collect();
    let mut knots = vec![(a, lines[0].1)];
    for pair in lines.windows(2) {
        let (t0, v0, m0) = pair[0];
        let (t1, v1, m1) = pair[1];
        // Intersection of the two tangents; parallel tangents coincide.
        if (m1 - m0).abs() > 1e-14 {
            let x = ((v0 - m0 * t0) - (v1 - m1 * t1)) / (m1 - m0);
            if x > t0 && x < t1 {
                knots.push((x, v0 + m0 * (x - t0)));
            }
        }
    }
    knots.push((b, lines[m - 1].1));
    knots
}

fn chords(profile: &GapProfile, a: f64, b: f64) -> Vec<(f64, f64)> {
    let m = PL_POINTS_PER_PIECE;
    (0..m)
        .map(|j| {
            let t = if j == m - 1 { b } else { a + (b - a) * j as f64 / (m - 1) as f64 };
            (t, profile.delta(t))
        })
        .collect()
}

/// `∫₀¹ Δ(u)^(−α) du` by adaptive quadrature.
pub fn gap_power_integral(profile: &GapProfile, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(domain(format!("gap integral exponent must exceed 1, got {alpha}")));
    }
    gap_power_integral_over(profile, alpha, 0.0, 1.0, GAP_INTEGRAL_RTOL)
}

pub(crate) fn gap_power_integral_over(profile: &GapProfile, alpha: f64, a: f64, b: f64, rtol: f64) -> Result<f64> {
    let breaks = quad::breakpoints_within(a, b, profile.breakpoints());
    let r = quad::integrate_breaks(|u| libm::pow(profile.delta(u), -alpha), &breaks, rtol, 0.0)?;
    Ok(r.value)
}

/// `C_α·Δ*^(−(α−1))` with `C_α = C·α/(α − 1)`.
pub fn gap_integral_bound(measure_constant: f64, alpha: f64, min_gap: f64) -> f64 {
    measure_constant * alpha / (alpha - 1.0) * libm::pow(min_gap, -(alpha - 1.0))
}

/// Gap-power integral together with its measure-condition bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapIntegralCheck {
    pub alpha: f64,
    pub integral: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluate the integral and compare it with the bound for a measure
/// constant `c_hat`, allowing `slack` relative discretization headroom.
pub fn check_gap_integral(profile: &GapProfile, alpha: f64, c_hat: f64, slack: f64) -> Result<GapIntegralCheck> {
    let integral = gap_power_integral(profile, alpha)?;
    let bound = gap_integral_bound(c_hat, alpha, profile.min_gap());
    Ok(GapIntegralCheck {
        alpha,
        integral,
        bound,
        holds: integral <= bound * (1.0 + slack),
    })
}
