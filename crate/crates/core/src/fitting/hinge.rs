// SPDX-License-Identifier: Apache-2.0

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use super::{check_xy, covariance, fit_line, FitResult, Model};
use crate::error::{Error, Result};
use crate::linalg;

/// Minimum F statistic for the two-segment model to be accepted.
pub const DEFAULT_F_RATIO: f64 = 10.0;

const SUBDIVISIONS: usize = 8;

/// Continuous two-segment line:
/// y = b + s₁x for x < x_b, and b + s₁x_b + s₂(x − x_b) beyond.
pub struct Hinge;

impl Model for Hinge {
    const NAMES: &'static [&'static str] = &["breakpoint", "slope_left", "slope_right", "intercept"];

    fn eval(&self, p: &[f64], x: f64) -> f64 {
        p[3] + p[1] * x.min(p[0]) + p[2] * (x - p[0]).max(0.0)
    }

    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        if x < p[0] {
            out.copy_from_slice(&[0.0, x, 0.0, 1.0]);
        } else {
            out.copy_from_slice(&[p[1] - p[2], p[0], x - p[0], 1.0]);
        }
    }
}

/// Best (intercept, s₁, s₂) and RSS for a fixed breakpoint.
fn solve_at(x: &[f64], y: &[f64], xb: f64) -> Option<([f64; 3], f64)> {
    let mut a = [0.0; 9];
    let mut b = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let row = [1.0, xi.min(xb), (xi - xb).max(0.0)];
        for i in 0..3 {
            b[i] += row[i] * yi;
            for j in 0..3 {
                a[i * 3 + j] += row[i] * row[j];
            }
        }
    }
    let c = linalg::solve_dense(&a, &b, 3)?;
    let rss =
        x.iter().zip(y).map(|(&xi, &yi)| (yi - c[0] - c[1] * xi.min(xb) - c[2] * (xi - xb).max(0.0)).powi(2)).sum();
    Some(([c[0], c[1], c[2]], rss))
}

/// Two-segment fit with the default F-ratio gate.
pub fn fit_piecewise_linear(x: &[f64], y: &[f64]) -> Result<FitResult> {
    fit_piecewise_linear_with(x, y, DEFAULT_F_RATIO)
}

/// Two-segment fit by exhaustive breakpoint search with golden-section
/// refinement. Fails with `NoBreakpoint` unless the F statistic of the
/// two-segment model over a single line reaches `min_f_ratio`.
pub fn fit_piecewise_linear_with(x: &[f64], y: &[f64], min_f_ratio: f64) -> Result<FitResult> {
    check_xy(x, y, 6, "need at least 6 samples")?;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let n = xs.len();
    let one = fit_line(&xs, &ys)?;

    // breakpoints leaving at least two points on each side
    let mut best: Option<(f64, [f64; 3], f64)> = None;
    let mut evaluations = 0;
    for k in 1..n - 2 {
        let (lo, hi) = (xs[k], xs[k + 1]);
        if hi <= lo {
            continue;
        }
        for s in 0..SUBDIVISIONS {
            let xb = lo + (hi - lo) * s as f64 / SUBDIVISIONS as f64;
            evaluations += 1;
            if let Some((c, r)) = solve_at(&xs, &ys, xb) {
                if best.is_none_or(|b| r < b.2) {
                    best = Some((xb, c, r));
                }
            }
        }
    }
    let (mut xb, mut coef, mut rss2) = best.ok_or(Error::InsufficientData("no admissible breakpoint"))?;

    let step = {
        let k = xs.partition_point(|&v| v <= xb).clamp(1, n - 1);
        (xs[k] - xs[k - 1]) / SUBDIVISIONS as f64
    };
    let (mut a, mut b) = ((xb - step).max(xs[1]), (xb + step).min(xs[n - 2]));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = b - phi * (b - a);
        let m2 = a + phi * (b - a);
        let r1 = solve_at(&xs, &ys, m1).map_or(f64::INFINITY, |s| s.1);
        let r2 = solve_at(&xs, &ys, m2).map_or(f64::INFINITY, |s| s.1);
        evaluations += 2;
        if r1 < r2 {
            b = m2;
        } else {
            a = m1;
        }
    }
    if let Some((c, r)) = solve_at(&xs, &ys, 0.5 * (a + b)) {
        if r <= rss2 {
            xb = 0.5 * (a + b);
            coef = c;
            rss2 = r;
        }
    }

    let scale: f64 = ys.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let f_ratio = if rss2 <= 1e-28 * scale {
        if one.rss > 1e-24 * scale {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        ((one.rss - rss2) / 2.0) / (rss2 / (n - 4) as f64)
    };
    if !(f_ratio >= min_f_ratio) {
        return Err(Error::NoBreakpoint { f_ratio });
    }
    let params = vec![xb, coef[1], coef[2], coef[0]];
    let (std_errors, degenerate) = covariance(&Hinge, &params, &xs, rss2);
    Ok(FitResult {
        names: Hinge::NAMES,
        params,
        std_errors,
        rss: rss2,
        converged: true,
        iterations: evaluations,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::test_util::assert_gradient;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_threshold_hinge() {
        let x: Vec<f64> = (0..30).map(|i| 0.13 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 0.3 + 5.0 * (v - 2.0).max(0.0)).collect();
        let r = fit_piecewise_linear(&x, &y).unwrap();
        assert!((r.params[0] - 2.0).abs() < 1e-6, "{}", r.params[0]);
        assert!(r.params[1].abs() < 1e-9);
        assert_relative_eq!(r.params[2], 5.0, max_relative = 1e-9);
        assert_relative_eq!(r.params[3], 0.3, max_relative = 1e-9);
    }

    #[test]
    fn straight_line_has_no_breakpoint() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.0 + 2.0 * v).collect();
        assert!(matches!(fit_piecewise_linear(&x, &y), Err(Error::NoBreakpoint { .. })));
    }

    #[test]
    fn too_few_points() {
        assert!(fit_piecewise_linear(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0, 0.0, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn gradient() {
        assert_gradient(&Hinge, &[2.0, 0.4, 3.0, 1.0], &[0.5, 1.9, 2.1, 4.0]);
    }
}
