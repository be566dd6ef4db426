// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) with continuous output.
//!
//! Output is sampled from the fourth-order dense interpolant so the
//! reporting grid never constrains the step size.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps smaller than this abort with `StepSizeUnderflow`.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_min: 1e-9, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrate `dy/dt = f(t, y)` from `t0` and return the state at every time
/// in `report` (ascending, each ≥ `t0`).
pub fn solve<F>(mut f: F, t0: f64, y0: &[f64], report: &[f64], opts: &OdeOptions) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if report.windows(2).any(|w| w[1] < w[0]) || report.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter {
            name: "report grid",
            reason: "must be ascending and start at or after t0",
        });
    }
    let n = y0.len();
    let mut out = Vec::with_capacity(report.len());
    let mut stats = OdeStats::default();
    let mut next = 0;
    while next < report.len() && report[next] == t0 {
        out.push(y0.to_vec());
        next += 1;
    }
    let Some(&t_end) = report.last() else {
        return Ok((out, stats));
    };
    if next == report.len() {
        return Ok((out, stats));
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = [(); 7].map(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut rcont = [(); 5].map(|_| vec![0.0; n]);

    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &k[0], opts, t_end - t0, &mut stats);
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;

    while next < report.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::NoConvergence { iterations: opts.max_steps });
        }
        h = h.min(opts.h_max).min(t_end - t);
        if h < opts.h_min && t_end - t > opts.h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let stage = |ytmp: &mut Vec<f64>, k: &[Vec<f64>; 7], coeffs: &[(usize, f64)]| {
            for i in 0..n {
                let mut acc = y[i];
                for &(j, a) in coeffs {
                    acc += h * a * k[j][i];
                }
                ytmp[i] = acc;
            }
        };
        stage(&mut ytmp, &k, &[(0, A21)]);
        f(t + C2 * h, &ytmp, &mut k[1]);
        stage(&mut ytmp, &k, &[(0, A31), (1, A32)]);
        f(t + C3 * h, &ytmp, &mut k[2]);
        stage(&mut ytmp, &k, &[(0, A41), (1, A42), (2, A43)]);
        f(t + C4 * h, &ytmp, &mut k[3]);
        stage(&mut ytmp, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        f(t + C5 * h, &ytmp, &mut k[4]);
        stage(&mut ytmp, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        f(t + h, &ytmp, &mut k[5]);
        for i in 0..n {
            ynew[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        f(t + h, &ynew, &mut k[6]);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        // PI step control (Hairer's DOPRI5 settings)
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / fac_old.powf(0.04);
        fac = (fac / 0.9).clamp(1.0 / 10.0, 1.0 / 0.2);
        if err <= 1.0 {
            fac_old = err.max(1e-4);
            stats.accepted += 1;
            for i in 0..n {
                let dy = ynew[i] - y[i];
                let bspl = h * k[0][i] - dy;
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = bspl;
                rcont[3][i] = dy - h * k[6][i] - bspl;
                rcont[4][i] =
                    h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
            }
            let t_new = t + h;
            while next < report.len() && report[next] <= t_new {
                let s = (report[next] - t) / h;
                let s1 = 1.0 - s;
                out.push(
                    (0..n)
                        .map(|i| {
                            rcont[0][i] + s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])))
                        })
                        .collect(),
                );
                next += 1;
            }
            t = t_new;
            core::mem::swap(&mut y, &mut ynew);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / 0.9).min(1.0 / 0.2);
        }
    }
    Ok((out, stats))
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], opts: &OdeOptions, span: f64, stats: &mut OdeStats) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len().max(1) as f64;
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span).max(opts.h_min);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, d)| v + h0 * d).collect();
    let mut f1 = vec![0.0; y.len()];
    f(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let d2 = (f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span).max(opts.h_min)
}

/// `n` equally spaced times covering `[t0, t1]` inclusive.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t1],
        _ => {
            let dt = (t1 - t0) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { t1 } else { t0 + dt * i as f64 }).collect()
        }
    }
}
