// SPDX-License-Identifier: Apache-2.0

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use super::{check_xy, multi_start, FitResult, Model};
use crate::error::Result;

fn peak(x: f64, center: f64, fwhm: f64, amp: f64) -> f64 {
    let u = 2.0 * (x - center) / fwhm;
    amp / (1.0 + u * u)
}

/// Writes ∂/∂(center, fwhm, amplitude) of one component.
fn peak_gradient(x: f64, center: f64, fwhm: f64, amp: f64, out: &mut [f64]) {
    let u = 2.0 * (x - center) / fwhm;
    let l = 1.0 / (1.0 + u * u);
    out[0] = 4.0 * amp * u * l * l / fwhm;
    out[1] = 2.0 * amp * u * u * l * l / fwhm;
    out[2] = l;
}

/// y = A / (1 + (2(x − x₀)/w)²) + c.
pub struct Lorentzian;

impl Model for Lorentzian {
    const NAMES: &'static [&'static str] = &["center", "fwhm", "amplitude", "offset"];

    fn eval(&self, p: &[f64], x: f64) -> f64 {
        peak(x, p[0], p[1], p[2]) + p[3]
    }

    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        peak_gradient(x, p[0], p[1], p[2], &mut out[..3]);
        out[3] = 1.0;
    }
}

/// Sum of two Lorentzians on a common offset.
pub struct DoubleLorentzian;

impl Model for DoubleLorentzian {
    const NAMES: &'static [&'static str] =
        &["center1", "fwhm1", "amplitude1", "center2", "fwhm2", "amplitude2", "offset"];

    fn eval(&self, p: &[f64], x: f64) -> f64 {
        peak(x, p[0], p[1], p[2]) + peak(x, p[3], p[4], p[5]) + p[6]
    }

    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        peak_gradient(x, p[0], p[1], p[2], &mut out[..3]);
        peak_gradient(x, p[3], p[4], p[5], &mut out[3..6]);
        out[6] = 1.0;
    }
}

fn sorted_pairs(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    (idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| y[i]).collect())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

/// (center, fwhm, amplitude) of the most prominent feature of `d` (sorted x)
/// measured from zero.
fn moment_guess(x: &[f64], d: &[f64]) -> (f64, f64, f64) {
    let (imax, _) =
        d.iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v.abs() > acc.1.abs() { (i, v) } else { acc });
    let amp = d[imax];
    let half = 0.5 * amp.abs();
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for j in range {
            if d[j].abs() < half {
                let (a, b) = (d[prev].abs(), d[j].abs());
                let f = (a - half) / (a - b);
                return Some(x[prev] + f * (x[j] - x[prev]));
            }
            prev = j;
        }
        None
    };
    let left = crossing(&mut (0..imax).rev());
    let right = crossing(&mut (imax + 1..x.len()));
    let span = x[x.len() - 1] - x[0];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[imax] - l),
        (None, Some(r)) => 2.0 * (r - x[imax]),
        (None, None) => 0.25 * span,
    };
    let fwhm = if fwhm > 0.0 { fwhm } else { 0.25 * span };
    (x[imax], fwhm, amp)
}

fn flat_result(names: &'static [&'static str], x: &[f64], y0: f64) -> FitResult {
    let mid = 0.5 * (x[0] + x[x.len() - 1]);
    let span = x[x.len() - 1] - x[0];
    let mut params = vec![0.0; names.len()];
    let mut i = 0;
    while i + 3 < names.len() {
        params[i] = mid;
        params[i + 1] = span;
        i += 3;
    }
    params[names.len() - 1] = y0;
    FitResult { names, params, std_errors: None, rss: 0.0, converged: false, iterations: 0, degenerate: true }
}

fn is_flat(y: &[f64]) -> bool {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE)
}

/// Single Lorentzian plus offset. A flat input yields a zero-amplitude
/// result flagged as degenerate.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(x, y, 5, "need at least 5 samples")?;
    let (xs, ys) = sorted_pairs(x, y);
    if is_flat(&ys) {
        return Ok(flat_result(Lorentzian::NAMES, &xs, ys[0]));
    }
    let offset = median(&ys);
    let d: Vec<f64> = ys.iter().map(|v| v - offset).collect();
    let (c, w, a) = moment_guess(&xs, &d);
    let starts = [vec![c, w, a, offset], vec![c, 0.5 * w, a, offset], vec![c, 2.0 * w, a, offset]];
    let mut r = multi_start(&Lorentzian, &xs, &ys, &starts)?;
    r.params[1] = r.params[1].abs();
    Ok(r)
}

/// Two Lorentzians plus offset, components ordered by center.
pub fn fit_double_lorentzian(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(x, y, 9, "need at least 9 samples")?;
    let (xs, ys) = sorted_pairs(x, y);
    if is_flat(&ys) {
        return Ok(flat_result(DoubleLorentzian::NAMES, &xs, ys[0]));
    }
    let offset = median(&ys);
    let d: Vec<f64> = ys.iter().map(|v| v - offset).collect();
    let (c1, w1, a1) = moment_guess(&xs, &d);
    let resid: Vec<f64> = xs.iter().zip(&d).map(|(&xi, &di)| di - peak(xi, c1, w1, a1)).collect();
    let (c2, w2, a2) = moment_guess(&xs, &resid);
    let starts = [
        vec![c1, w1, a1, c2, w2, a2, offset],
        vec![c1 - 0.25 * w1, 0.5 * w1, 0.5 * a1, c1 + 0.25 * w1, 0.5 * w1, 0.5 * a1, offset],
        vec![c1, w1, a1, c2, w1, 0.1 * a1, offset],
    ];
    let mut r = multi_start(&DoubleLorentzian, &xs, &ys, &starts)?;
    r.params[1] = r.params[1].abs();
    r.params[4] = r.params[4].abs();
    if r.params[3] < r.params[0] {
        for i in 0..3 {
            r.params.swap(i, i + 3);
            if let Some(e) = r.std_errors.as_mut() {
                e.swap(i, i + 3);
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::test_util::assert_gradient;
    use approx::assert_relative_eq;

    fn xs(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn single_exact() {
        let x = xs(81, -2.0, 2.0);
        let truth = [0.13, 0.34, 7.5, -0.4];
        let y: Vec<f64> = x.iter().map(|&v| Lorentzian.eval(&truth, v)).collect();
        let r = fit_lorentzian(&x, &y).unwrap();
        for (a, b) in r.params.iter().zip(&truth) {
            assert_relative_eq!(*a, *b, max_relative = 1e-8);
        }
    }

    #[test]
    fn symmetric_center() {
        let x = xs(41, -1.0, 1.0);
        let y: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + 9.0 * v * v)).collect();
        let r = fit_lorentzian(&x, &y).unwrap();
        assert!(r.params[0].abs() < 0.05);
    }

    #[test]
    fn dip_is_negative_amplitude() {
        let x = xs(61, 0.0, 10.0);
        let truth = [4.0, 1.5, -2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|&v| Lorentzian.eval(&truth, v)).collect();
        let r = fit_lorentzian(&x, &y).unwrap();
        assert_relative_eq!(r.params[2], -2.0, max_relative = 1e-8);
    }

    #[test]
    fn flat_is_flagged() {
        let x = xs(20, 0.0, 1.0);
        let r = fit_lorentzian(&x, &[2.0; 20]).unwrap();
        assert_eq!(r.get("amplitude"), Some(0.0));
        assert!(r.degenerate && !r.converged);
    }

    #[test]
    fn double_exact_and_ordered() {
        let x = xs(121, -60.0, 0.0);
        let truth = [-20.0, 9.0, 4.0, -42.0, 12.0, 6.0, 0.5];
        let y: Vec<f64> = x.iter().map(|&v| DoubleLorentzian.eval(&truth, v)).collect();
        let r = fit_double_lorentzian(&x, &y).unwrap();
        assert!(r.params[0] < r.params[3]);
        let want = [-42.0, 12.0, 6.0, -20.0, 9.0, 4.0, 0.5];
        for (a, b) in r.params.iter().zip(&want) {
            assert_relative_eq!(*a, *b, max_relative = 1e-7);
        }
    }

    #[test]
    fn identical_components_are_degenerate() {
        let x = xs(60, -5.0, 5.0);
        let p = [0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0];
        let (_, degenerate) = crate::fitting::covariance(&DoubleLorentzian, &p, &x, 1e-3);
        assert!(degenerate);
    }

    #[test]
    fn gradients() {
        assert_gradient(&Lorentzian, &[0.2, 0.7, 3.0, 1.0], &[-1.0, 0.1, 0.2, 0.9, 3.0]);
        assert_gradient(&DoubleLorentzian, &[0.2, 0.7, 3.0, 1.4, 0.4, -1.0, 0.5], &[-1.0, 0.3, 1.3, 2.0]);
    }
}
