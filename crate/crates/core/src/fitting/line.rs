// SPDX-License-Identifier: Apache-2.0

use alloc::vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use super::{check_xy, FitResult, Model};
use crate::error::{Error, Result};

/// y = slope·x + intercept.
pub struct Line;

impl Model for Line {
    const NAMES: &'static [&'static str] = &["slope", "intercept"];

    fn eval(&self, p: &[f64], x: f64) -> f64 {
        p[0] * x + p[1]
    }

    fn gradient(&self, _p: &[f64], x: f64, out: &mut [f64]) {
        out[0] = x;
        out[1] = 1.0;
    }
}

/// Ordinary least squares.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(x, y, 2, "a line needs at least two points")?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    if sxx <= (1e-12 * scale).powi(2) * n {
        return Err(Error::DegenerateFit("need at least two distinct x values"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let std_errors = (x.len() > 2).then(|| {
        let s2 = rss / (n - 2.0);
        vec![(s2 / sxx).sqrt(), (s2 * (1.0 / n + mx * mx / sxx)).sqrt()]
    });
    Ok(FitResult {
        names: Line::NAMES,
        params: vec![slope, intercept],
        std_errors,
        rss,
        converged: true,
        iterations: 0,
        degenerate: false,
    })
}

/// T₂ (µs) and ε from a fit of the nutation damping Γ (1/µs) against Ω₁/2π
/// (MHz): Γ = 1/(2T₂) + ε·Ω₁/2π.
pub fn t2_and_epsilon(fit: &FitResult) -> Result<(f64, f64)> {
    let (Some(slope), Some(intercept)) = (fit.get("slope"), fit.get("intercept")) else {
        return Err(Error::InvalidParameter { name: "fit", reason: "not a line fit" });
    };
    if !(intercept > 0.0) {
        return Err(Error::InvalidParameter { name: "intercept", reason: "must be positive for a finite T2" });
    }
    Ok((1.0 / (2.0 * intercept), slope))
}
