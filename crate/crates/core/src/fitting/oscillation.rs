// SPDX-License-Identifier: Apache-2.0

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use super::{check_xy, multi_start, FitResult, Model};
use crate::error::{Error, Result};

/// y = A·e^(−Γt)·cos(Ωt + φ) + c, t in µs, Γ in 1/µs, Ω in rad/µs.
pub struct DampedCosine;

impl Model for DampedCosine {
    const NAMES: &'static [&'static str] = &["amplitude", "gamma", "omega", "phase", "offset"];

    fn eval(&self, p: &[f64], t: f64) -> f64 {
        p[0] * (-p[1] * t).exp() * (p[2] * t + p[3]).cos() + p[4]
    }

    fn gradient(&self, p: &[f64], t: f64, out: &mut [f64]) {
        let e = (-p[1] * t).exp();
        let (s, c) = (p[2] * t + p[3]).sin_cos();
        out[0] = e * c;
        out[1] = -t * p[0] * e * c;
        out[2] = -t * p[0] * e * s;
        out[3] = -p[0] * e * s;
        out[4] = 1.0;
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    } else if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Dominant angular frequency of the mean-removed signal and its complex
/// amplitude, from a zero-padded direct DFT with parabolic peak refinement.
fn spectral_peak(t: &[f64], y: &[f64], mean: f64) -> Result<(f64, Complex64)> {
    let mut sorted = t.to_vec();
    sorted.sort_by(f64::total_cmp);
    let span = sorted[sorted.len() - 1] - sorted[0];
    let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    if gaps.is_empty() || !(span > 0.0) {
        return Err(Error::InsufficientData("time samples must not coincide"));
    }
    gaps.sort_by(f64::total_cmp);
    let dt = gaps[gaps.len() / 2];
    let d_omega = 2.0 * PI / (8.0 * span);
    let n_omega = ((PI / dt) / d_omega).ceil() as usize;
    let dft =
        |w: f64| -> Complex64 { t.iter().zip(y).map(|(&ti, &yi)| Complex64::from_polar(yi - mean, -w * ti)).sum() };
    let power: Vec<f64> = (1..=n_omega).map(|k| dft(k as f64 * d_omega).norm_sqr()).collect();
    let (k, _) =
        power.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
    let mut omega = (k + 1) as f64 * d_omega;
    if k > 0 && k + 1 < power.len() {
        let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            omega += 0.5 * (a - c) / den * d_omega;
        }
    }
    if omega * span < 2.0 * PI * 0.95 {
        return Err(Error::InsufficientData("data span less than one oscillation period"));
    }
    Ok((omega, dft(omega)))
}

/// Fit a damped cosine plus offset. Needs at least 8 samples covering one period.
pub fn fit_damped_oscillation(t: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(t, y, 8, "need at least 8 samples")?;
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::InsufficientData("constant signal has no spectral peak"));
    }
    let (omega, s) = spectral_peak(t, y, mean)?;
    let t0 = t.iter().copied().fold(f64::INFINITY, f64::min);
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t0;
    let phase = s.arg();
    let starts: Vec<Vec<f64>> = [1.0, 0.1, 4.0]
        .iter()
        .map(|&k| {
            let gamma = k / span;
            let weight: f64 = t.iter().map(|&ti| (-gamma * ti).exp()).sum();
            let amp = 2.0 * s.norm() / weight.max(f64::MIN_POSITIVE);
            vec![amp, gamma, omega, phase, mean]
        })
        .collect();
    let mut r = multi_start(&DampedCosine, t, y, &starts)?;
    let p = &mut r.params;
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] = -p[3];
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[3] += PI;
    }
    p[3] = wrap_phase(p[3]);
    Ok(r)
}
