// SPDX-License-Identifier: Apache-2.0

//! Least-squares estimators: damped Levenberg–Marquardt with analytic
//! Jacobians for the nonlinear models, closed-form OLS for lines, and a
//! breakpoint search for continuous two-segment fits.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;

mod hinge;
mod line;
mod lorentzian;
mod oscillation;

pub use hinge::{fit_piecewise_linear, fit_piecewise_linear_with, Hinge, DEFAULT_F_RATIO};
pub use line::{fit_line, t2_and_epsilon, Line};
pub use lorentzian::{fit_double_lorentzian, fit_lorentzian, DoubleLorentzian, Lorentzian};
pub use oscillation::{fit_damped_oscillation, DampedCosine};

pub const MAX_ITERATIONS: usize = 500;
pub const RSS_REL_TOL: f64 = 1e-10;
pub const DEFAULT_RESTARTS: usize = 3;

/// A model y = f(p, x) with an analytic gradient in p.
pub trait Model {
    const NAMES: &'static [&'static str];

    fn eval(&self, p: &[f64], x: f64) -> f64;
    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]);

    fn n_params(&self) -> usize {
        Self::NAMES.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: &'static [&'static str],
    pub params: Vec<f64>,
    /// Present only for converged fits with residual degrees of freedom.
    pub std_errors: Option<Vec<f64>>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Normal matrix is numerically singular at the solution.
    pub degenerate: bool,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.params[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| *n == name)?;
        self.std_errors.as_ref().map(|e| e[i])
    }
}

pub(crate) fn check_xy(x: &[f64], y: &[f64], min: usize, what: &'static str) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InsufficientData("x and y differ in length"));
    }
    if x.len() < min {
        return Err(Error::InsufficientData(what));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter { name: "data", reason: "must be finite" });
    }
    Ok(())
}

pub(crate) fn rss<M: Model>(m: &M, p: &[f64], x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&xi, &yi)| (yi - m.eval(p, xi)).powi(2)).sum()
}

/// Normal matrix JᵀJ (row-major) at `p`.
pub(crate) fn normal_matrix<M: Model>(m: &M, p: &[f64], x: &[f64]) -> Vec<f64> {
    let k = m.n_params();
    let mut a = vec![0.0; k * k];
    let mut row = vec![0.0; k];
    for &xi in x {
        m.gradient(p, xi, &mut row);
        for i in 0..k {
            for j in 0..k {
                a[i * k + j] += row[i] * row[j];
            }
        }
    }
    a
}

/// Standard errors from (JᵀJ)⁻¹·RSS/(n − p) and a near-singularity flag.
pub(crate) fn covariance<M: Model>(m: &M, p: &[f64], x: &[f64], rss: f64) -> (Option<Vec<f64>>, bool) {
    let k = m.n_params();
    let a = normal_matrix(m, p, x);
    let d: Vec<f64> = (0..k).map(|i| a[i * k + i].sqrt()).collect();
    if d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return (None, true);
    }
    let scaled: Vec<f64> = (0..k * k).map(|ij| a[ij] / (d[ij / k] * d[ij % k])).collect();
    let Some(inv) = linalg::invert_dense(&scaled, k) else {
        return (None, true);
    };
    let degenerate = (0..k).any(|i| !(inv[i * k + i] < 1e10));
    if x.len() <= k {
        return (None, degenerate);
    }
    let s2 = rss / (x.len() - k) as f64;
    let se = (0..k).map(|i| (inv[i * k + i] * s2).sqrt() / d[i]).collect();
    (Some(se), degenerate)
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
}

/// Levenberg–Marquardt with Marquardt diagonal scaling.
pub(crate) fn levenberg_marquardt<M: Model>(m: &M, x: &[f64], y: &[f64], p0: &[f64]) -> Result<LmOutcome> {
    let k = m.n_params();
    let mut p = p0.to_vec();
    let mut cur = rss(m, &p, x, y);
    if !cur.is_finite() {
        return Err(Error::InvalidParameter { name: "initial guess", reason: "gives a non-finite residual" });
    }
    let y_scale: f64 = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut lambda = 1e-3;
    let mut row = vec![0.0; k];
    for iter in 1..=MAX_ITERATIONS {
        if cur <= 1e-30 * y_scale {
            return Ok(LmOutcome { params: p, rss: cur, iterations: iter - 1 });
        }
        let mut a = vec![0.0; k * k];
        let mut g = vec![0.0; k];
        for (&xi, &yi) in x.iter().zip(y) {
            let r = yi - m.eval(&p, xi);
            m.gradient(&p, xi, &mut row);
            for i in 0..k {
                g[i] += row[i] * r;
                for j in 0..k {
                    a[i * k + j] += row[i] * row[j];
                }
            }
        }
        let max_diag = (0..k).map(|i| a[i * k + i]).fold(0.0f64, f64::max);
        let floor = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
        loop {
            let mut damped = a.clone();
            for i in 0..k {
                damped[i * k + i] += lambda * a[i * k + i].max(floor);
            }
            let trial = linalg::solve_dense(&damped, &g, k).map(|delta| {
                let q: Vec<f64> = p.iter().zip(&delta).map(|(pi, di)| pi + di).collect();
                let r = rss(m, &q, x, y);
                (q, r)
            });
            match trial {
                Some((q, r)) if r.is_finite() && r < cur => {
                    let rel = (cur - r) / cur;
                    p = q;
                    cur = r;
                    lambda = (lambda / 10.0).max(1e-15);
                    if rel < RSS_REL_TOL {
                        return Ok(LmOutcome { params: p, rss: cur, iterations: iter });
                    }
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        // no downhill direction left: stationary point
                        return Ok(LmOutcome { params: p, rss: cur, iterations: iter });
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS })
}

/// Run LM from each starting point and keep the lowest residual.
pub(crate) fn multi_start<M: Model>(m: &M, x: &[f64], y: &[f64], starts: &[Vec<f64>]) -> Result<FitResult> {
    let mut best: Option<LmOutcome> = None;
    let mut last_err = Error::NoConvergence { iterations: MAX_ITERATIONS };
    for s in starts {
        match levenberg_marquardt(m, x, y, s) {
            Ok(o) => {
                if best.as_ref().is_none_or(|b| o.rss < b.rss) {
                    best = Some(o);
                }
            }
            Err(e) => last_err = e,
        }
    }
    let best = best.ok_or(last_err)?;
    let (std_errors, degenerate) = covariance(m, &best.params, x, best.rss);
    Ok(FitResult {
        names: M::NAMES,
        params: best.params,
        std_errors,
        rss: best.rss,
        converged: true,
        iterations: best.iterations,
        degenerate,
    })
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::Model;
    use alloc::vec;

    /// Central-difference check of the analytic gradient.
    pub fn assert_gradient<M: Model>(m: &M, p: &[f64], xs: &[f64]) {
        let k = m.n_params();
        let mut g = vec![0.0; k];
        for &x in xs {
            m.gradient(p, x, &mut g);
            for i in 0..k {
                let h = 1e-6 * p[i].abs().max(1e-3);
                let mut hi = p.to_vec();
                let mut lo = p.to_vec();
                hi[i] += h;
                lo[i] -= h;
                let fd = (m.eval(&hi, x) - m.eval(&lo, x)) / (2.0 * h);
                let scale = g[i].abs().max(fd.abs()).max(1e-8);
                assert!((g[i] - fd).abs() / scale < 1e-6, "param {i} at x={x}: {} vs {fd}", g[i]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;
    impl Model for Exp {
        const NAMES: &'static [&'static str] = &["a", "k"];
        fn eval(&self, p: &[f64], x: f64) -> f64 {
            p[0] * (-p[1] * x).exp()
        }
        fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
            let e = (-p[1] * x).exp();
            out[0] = e;
            out[1] = -p[0] * x * e;
        }
    }

    #[test]
    fn lm_recovers_exact_exponential() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| 2.5 * (-1.3 * t).exp()).collect();
        let r = multi_start(&Exp, &x, &y, &[vec![1.0, 0.5]]).unwrap();
        assert!((r.params[0] - 2.5).abs() < 1e-9 && (r.params[1] - 1.3).abs() < 1e-9);
        assert!(r.rss < 1e-20);
        assert_eq!(r.get("k"), Some(r.params[1]));
        assert!(!r.degenerate);
    }

    #[test]
    fn flags_unidentifiable_parameter() {
        struct Dup;
        impl Model for Dup {
            const NAMES: &'static [&'static str] = &["a", "b"];
            fn eval(&self, p: &[f64], x: f64) -> f64 {
                (p[0] + p[1]) * x
            }
            fn gradient(&self, _: &[f64], x: f64, out: &mut [f64]) {
                out[0] = x;
                out[1] = x;
            }
        }
        let x = [1.0, 2.0, 3.0];
        let (_, degenerate) = covariance(&Dup, &[1.0, 1.0], &x, 0.1);
        assert!(degenerate);
    }
}
