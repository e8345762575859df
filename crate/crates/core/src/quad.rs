//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Global subdivision: the panel with the largest error estimate is bisected
//! until the summed estimate meets `max(abs_tol, rel_tol * |I|)`. Breakpoints
//! let callers pin known kinks or narrow features to panel edges.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{numeric, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default cap on the number of panels before giving up.
pub const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub panels: usize,
}

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, libm::fabs((kron - gauss) * h))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<QuadResult> {
    integrate_breaks(f, &[a, b], rel_tol, abs_tol)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, seeding one panel per
/// consecutive pair of breakpoints. Breakpoints must be non-decreasing.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            panels: 0,
        });
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut settled = 0.0;
    let mut settled_err = 0.0;
    for w in breaks.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(numeric("quadrature breakpoints must be non-decreasing", w[0] - w[1]));
        }
        if w[1] == w[0] {
            continue;
        }
        let (value, err) = gk15(&f, w[0], w[1]);
        total += value;
        total_err += err;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    if !total.is_finite() || !total_err.is_finite() {
        return Err(numeric("integrand is not finite on the interval", total_err));
    }
    let mut panels = heap.len();
    loop {
        let target = abs_tol.max(rel_tol * libm::fabs(total));
        if total_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // Panels at the resolution limit of f64 cannot be refined further.
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * (1.0 + libm::fabs(mid)) {
            settled += worst.value;
            settled_err += worst.err;
            continue;
        }
        if panels >= MAX_PANELS {
            heap.push(worst);
            return Err(numeric(
                "adaptive quadrature exceeded its panel budget",
                total_err / libm::fabs(total).max(f64::MIN_POSITIVE),
            ));
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
        panels += 1;
    }
    // Re-sum to shed drift accumulated by the incremental updates.
    let value = heap.iter().map(|p| p.value).sum::<f64>() + settled;
    let abs_err = heap.iter().map(|p| p.err).sum::<f64>() + settled_err;
    if !value.is_finite() {
        return Err(numeric("quadrature produced a non-finite value", abs_err));
    }
    Ok(QuadResult { value, abs_err, panels })
}

/// Sorted, de-duplicated breakpoints inside `[a, b]`, always including the ends.
pub fn breakpoints_within(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = core::iter::once(a)
        .chain(extra.into_iter().filter(|&x| x > a && x < b))
        .chain(core::iter::once(b))
        .collect();
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 0.0).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
        let r = integrate(|x| x.powi(6), -1.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((r.value - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_integrand() {
        // 1/(x^2 + e^2) on [-1,1] = 2/e * atan(1/e)
        let e = 1e-3;
        let exact = 2.0 / e * libm::atan(1.0 / e);
        let r = integrate(|x| 1.0 / (x * x + e * e), -1.0, 1.0, 1e-10, 0.0).unwrap();
        assert!(((r.value - exact) / exact).abs() < 1e-10, "{} vs {}", r.value, exact);
    }

    #[test]
    fn breakpoints_at_kinks() {
        let r = integrate_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-13, 0.0).unwrap();
        assert!((r.value - 2.5).abs() < 1e-13);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, 1e-8, 0.0).is_err());
    }

    #[test]
    fn breakpoints_within_filters_and_sorts() {
        let b = breakpoints_within(0.0, 1.0, [0.5, 2.0, 0.25, 0.5, -1.0]);
        assert_eq!(b, [0.0, 0.25, 0.5, 1.0]);
    }
}
