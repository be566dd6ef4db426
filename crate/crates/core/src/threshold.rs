// SPDX-License-Identifier: Apache-2.0

//! Oscillation threshold against resonator loss, from simulated pump sweeps.
//!
//! For each loaded Q the initial inversion is stepped linearly (standing in
//! for pump energy), the burst peak power is recorded and a two-segment line
//! locates the knee. The knees are then regressed on 1/Q_L.

use alloc::vec::Vec;

use crate::dynamics::{peak_power_sweep, threshold_inversion, MaxwellBlochParams, Tolerances};
use crate::error::{Error, Result};
use crate::fitting::{fit_line, fit_piecewise_linear, FitResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    /// Sweep ceiling as a multiple of the linear threshold κcκs/(2g²).
    pub max_multiple: f64,
    /// Sweep points including N0 = 0.
    pub n_points: usize,
    /// Burst observation window, µs. Bursts at low Q last well under a
    /// microsecond, so the trajectory sampling must resolve them.
    pub window: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { max_multiple: 40.0, n_points: 41, window: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPoint {
    pub q_loaded: f64,
    /// κcκs/(2g²).
    pub linear_threshold: f64,
    pub n0: Vec<f64>,
    /// W.
    pub peak_power: Vec<f64>,
    pub hinge: FitResult,
    /// Knee of the peak-power curve, in spins.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScan {
    pub points: Vec<ThresholdPoint>,
    /// threshold = slope/Q_L + intercept.
    pub line: FitResult,
    pub r_squared: f64,
}

fn r_squared(y: &[f64], rss: f64) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if tss > 0.0 {
        1.0 - rss / tss
    } else {
        1.0
    }
}

/// Knee of the burst peak power against N0 at one loaded Q.
pub fn threshold_at(
    base: &MaxwellBlochParams,
    q_loaded: f64,
    settings: &ScanSettings,
    tol: &Tolerances,
) -> Result<ThresholdPoint> {
    if !(q_loaded > 0.0) {
        return Err(Error::InvalidParameter { name: "q_loaded", reason: "must be positive" });
    }
    if settings.n_points < 6 || !(settings.max_multiple > 1.0) {
        return Err(Error::InvalidParameter {
            name: "scan",
            reason: "needs at least 6 points and a ceiling above the threshold",
        });
    }
    let p = base.with_loaded_q(q_loaded);
    let linear = threshold_inversion(&p)?;
    let top = settings.max_multiple * linear;
    let last = (settings.n_points - 1) as f64;
    let n0: Vec<f64> = (0..settings.n_points).map(|i| top * i as f64 / last).collect();
    let peak_power = peak_power_sweep(&p, &n0, settings.window, tol)?;
    // fit in threshold units so the breakpoint grid is well scaled
    let x: Vec<f64> = n0.iter().map(|v| v / linear).collect();
    let hinge = fit_piecewise_linear(&x, &peak_power)?;
    let threshold = hinge.params[0] * linear;
    Ok(ThresholdPoint { q_loaded, linear_threshold: linear, n0, peak_power, hinge, threshold })
}

/// Threshold knees at each loaded Q and their regression on 1/Q_L.
pub fn threshold_scan(
    base: &MaxwellBlochParams,
    q_values: &[f64],
    settings: &ScanSettings,
    tol: &Tolerances,
) -> Result<ThresholdScan> {
    if q_values.len() < 3 {
        return Err(Error::InsufficientData("need at least three loaded Q values"));
    }
    let points = q_values.iter().map(|&q| threshold_at(base, q, settings, tol)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = points.iter().map(|p| 1.0 / p.q_loaded).collect();
    let y: Vec<f64> = points.iter().map(|p| p.threshold).collect();
    let line = fit_line(&x, &y)?;
    let r_squared = r_squared(&y, line.rss);
    Ok(ThresholdScan { points, line, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knee_lies_above_linear_threshold_with_depolarization() {
        let base = MaxwellBlochParams::paper_oscillator();
        let pt = threshold_at(&base, 1e5, &ScanSettings::default(), &Tolerances::default()).unwrap();
        assert!(pt.threshold > pt.linear_threshold);
        assert!(pt.threshold < 40.0 * pt.linear_threshold);
        assert!(pt.hinge.params[2] > pt.hinge.params[1]);
    }

    #[test]
    fn thresholds_fall_with_q() {
        let base = MaxwellBlochParams::paper_oscillator();
        let scan = threshold_scan(&base, &[5e4, 2e5, 6.5e5], &ScanSettings::default(), &Tolerances::default()).unwrap();
        assert!(scan.points.windows(2).all(|w| w[1].threshold < w[0].threshold));
        assert!(scan.line.params[0] > 0.0);
    }

    #[test]
    fn rejects_bad_settings() {
        let base = MaxwellBlochParams::paper_oscillator();
        let s = ScanSettings { n_points: 3, ..ScanSettings::default() };
        assert!(threshold_at(&base, 1e5, &s, &Tolerances::default()).is_err());
        assert!(threshold_scan(&base, &[1e5], &ScanSettings::default(), &Tolerances::default()).is_err());
    }
}
