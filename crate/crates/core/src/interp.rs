//! Piecewise-cubic interpolation: Hermite cells, shape-preserving slope
//! limiting, and a clamped cubic spline with one-sided end slopes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Result};

/// Index `i` such that `xs[i] <= x <= xs[i + 1]`, clamped to the valid cell range.
pub fn locate(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let last = xs.len() - 2;
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

/// Cubic Hermite cell on `[x0, x1]`: value and first derivative at `x`.
#[inline]
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let d00 = (6.0 * t2 - 6.0 * t) / h;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = (-6.0 * t2 + 6.0 * t) / h;
    let d11 = 3.0 * t2 - 2.0 * t;
    let deriv = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
    (value, deriv)
}

/// Fritsch–Carlson limiting of node slopes so that the Hermite interpolant of
/// monotone data stays monotone. Slopes that already satisfy the sufficient
/// condition are left untouched.
pub fn limit_monotone_slopes(xs: &[f64], ys: &[f64], slopes: &mut [f64]) {
    for i in 0..xs.len().saturating_sub(1) {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if delta == 0.0 {
            slopes[i] = 0.0;
            slopes[i + 1] = 0.0;
            continue;
        }
        let a = slopes[i] / delta;
        let b = slopes[i + 1] / delta;
        if a < 0.0 {
            slopes[i] = 0.0;
        }
        if b < 0.0 {
            slopes[i + 1] = 0.0;
        }
        let a = slopes[i] / delta;
        let b = slopes[i + 1] / delta;
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / libm::sqrt(r2);
            slopes[i] = tau * a * delta;
            slopes[i + 1] = tau * b * delta;
        }
    }
}

/// Monotone piecewise-cubic interpolant with caller-supplied (limited) slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut slopes: Vec<f64>) -> Result<Self> {
        check_abscissae(&xs)?;
        if ys.len() != xs.len() || slopes.len() != xs.len() {
            return Err(domain("interpolation arrays differ in length"));
        }
        limit_monotone_slopes(&xs, &ys, &mut slopes);
        Ok(Self { xs, ys, slopes })
    }

    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let i = locate(&self.xs, x);
        hermite(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            x,
        )
    }
}

/// Clamped cubic spline. End slopes come from one-sided second-order
/// differences, so no boundary values need to be known.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_abscissae(&xs)?;
        if ys.len() != xs.len() {
            return Err(domain("spline arrays differ in length"));
        }
        let n = xs.len();
        if n < 4 {
            return Err(domain("a cubic spline needs at least 4 samples"));
        }
        let d0 = one_sided_slope(xs[0], xs[1], xs[2], ys[0], ys[1], ys[2]);
        let dn = one_sided_slope(xs[n - 1], xs[n - 2], xs[n - 3], ys[n - 1], ys[n - 2], ys[n - 3]);

        // Tridiagonal system for the node second derivatives (clamped ends).
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let h0 = xs[1] - xs[0];
        diag[0] = h0 / 3.0;
        sup[0] = h0 / 6.0;
        rhs[0] = (ys[1] - ys[0]) / h0 - d0;
        for i in 1..n - 1 {
            let hl = xs[i] - xs[i - 1];
            let hr = xs[i + 1] - xs[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl;
        }
        let hn = xs[n - 1] - xs[n - 2];
        sub[n - 1] = hn / 6.0;
        diag[n - 1] = hn / 3.0;
        rhs[n - 1] = dn - (ys[n - 1] - ys[n - 2]) / hn;
        let m = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        Ok(Self { xs, ys, m })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    /// Value, first and second derivative at `x` (linear extrapolation of the
    /// end cells outside the node range).
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let i = locate(&self.xs, x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 + (3.0 * b * b - 1.0) * h / 6.0 * m1;
        let d2 = a * m0 + b * m1;
        (value, d1, d2)
    }
}

fn one_sided_slope(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    // Derivative at x0 of the quadratic through the three points.
    let h1 = x1 - x0;
    let h2 = x2 - x0;
    let d1 = (y1 - y0) / h1;
    let d2 = (y2 - y0) / h2;
    (d1 * h2 - d2 * h1) / (h2 - h1)
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let w = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / w;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / w;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn check_abscissae(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(domain("interpolation needs at least two nodes"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(domain("interpolation nodes must be finite"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("interpolation nodes must be strictly increasing"));
    }
    Ok(())
}
