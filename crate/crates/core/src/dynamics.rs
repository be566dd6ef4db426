// SPDX-License-Identifier: Apache-2.0

//! Semiclassical Maxwell-Bloch model of a single cavity mode coupled to an
//! inverted spin ensemble, in the frame rotating at the drive frequency:
//!
//! ```text
//! ȧ   = -iV - (κc + iΔc) a - i g S₋
//! Ṡ₋  = -(κs + iΔs) S₋ + 2i g a S_z
//! Ṡz  = i g (a* S₋ - a S₋*) - γ S_z
//! ```
//!
//! Internally the state is rescaled by the initial inversion (`a/√N0`,
//! `S₋/N0`, `S_z/N0`) and time runs in µs.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::constants::{dbm_to_watts, ghz_to_rad_per_s, HBAR};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellBlochParams {
    /// Spin transition, cavity and drive angular frequencies, rad/s.
    pub omega_s: f64,
    pub omega_c: f64,
    pub omega_d: f64,
    /// Single spin-photon coupling, rad/s.
    pub g: f64,
    /// Cavity loss rate ω_c/Q_L, 1/s.
    pub kappa_c: f64,
    /// Spin decoherence rate 2/T₂, 1/s.
    pub kappa_s: f64,
    /// Spin depolarization rate, 1/s.
    pub gamma: f64,
    /// Drive strength, √photons/s.
    pub v: f64,
    /// Initial collective inversion S_z(0).
    pub n0: f64,
    pub coupling_k: f64,
}

impl MaxwellBlochParams {
    /// Room-temperature amplifier: 9.4056 GHz, Q_L = 1.1×10⁴ at critical
    /// coupling, T₂ = 4.24 µs, γ = 4.5×10⁴ s⁻¹, g = 0.69 rad/s,
    /// ΔN′ = 2×10¹² and a −46 dBm probe.
    pub fn paper_amplifier() -> Self {
        let omega = ghz_to_rad_per_s(9.4056);
        let kappa_c = omega / 1.1e4;
        Self {
            omega_s: omega,
            omega_c: omega,
            omega_d: omega,
            g: 0.69,
            kappa_c,
            kappa_s: 2.0 / 4.24e-6,
            gamma: 4.5e4,
            v: drive_strength(dbm_to_watts(-46.0), kappa_c, omega),
            n0: 2e12,
            coupling_k: 1.0,
        }
    }

    /// Same medium in the high-Q oscillator resonator (Q_L = 5×10⁵ at
    /// 9.4043139 GHz), undriven.
    pub fn paper_oscillator() -> Self {
        let omega = ghz_to_rad_per_s(9.404_313_9);
        Self { omega_s: omega, omega_c: omega, omega_d: omega, kappa_c: omega / 5e5, v: 0.0, ..Self::paper_amplifier() }
    }

    pub fn with_loaded_q(mut self, q_l: f64) -> Self {
        self.kappa_c = self.omega_c / q_l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let rates =
            [("kappa_c", self.kappa_c), ("kappa_s", self.kappa_s), ("gamma", self.gamma), ("g", self.g), ("v", self.v)];
        for (name, r) in rates {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite and non-negative" });
            }
        }
        if !self.n0.is_finite() {
            return Err(Error::InvalidParameter { name: "n0", reason: "must be finite" });
        }
        if !(self.coupling_k > 0.0) {
            return Err(Error::InvalidParameter { name: "coupling_k", reason: "must be positive" });
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.n0.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    pub a: Complex64,
    pub s_minus: Complex64,
    pub s_z: f64,
}

impl SystemState {
    /// Empty cavity, no coherence, inversion `n0`.
    pub fn inverted(n0: f64) -> Self {
        Self { a: Complex64::new(0.0, 0.0), s_minus: Complex64::new(0.0, 0.0), s_z: n0 }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.s_minus.is_finite() && self.s_z.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Reporting grid size including both endpoints.
    pub n_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-12, n_points: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// µs.
    pub t: Vec<f64>,
    pub states: Vec<SystemState>,
    pub photons: Vec<f64>,
    /// W.
    pub p_out: Vec<f64>,
}

impl Trajectory {
    /// Index and value of the largest photon number.
    pub fn peak_photons(&self) -> (usize, f64) {
        self.photons
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc })
    }
}

/// V = √(P_in κc / ħω_c).
pub fn drive_strength(p_in: f64, kappa_c: f64, omega_c: f64) -> f64 {
    (p_in * kappa_c / (HBAR * omega_c)).sqrt()
}

/// P_out = n ħω_c κc k/(1+k).
pub fn output_power(photons: f64, kappa_c: f64, omega_c: f64, coupling_k: f64) -> f64 {
    photons * HBAR * omega_c * kappa_c * coupling_k / (1.0 + coupling_k)
}

/// Inverse of [`output_power`].
pub fn photon_number(p_out: f64, kappa_c: f64, omega_c: f64, coupling_k: f64) -> f64 {
    p_out * (1.0 + coupling_k) / (HBAR * omega_c * kappa_c * coupling_k)
}

/// Integrate from `initial` over `[0, t_span]` µs.
pub fn integrate(
    params: &MaxwellBlochParams,
    t_span: f64,
    initial: SystemState,
    tol: &Tolerances,
) -> Result<Trajectory> {
    params.validate()?;
    if !(t_span > 0.0) {
        return Err(Error::InvalidParameter { name: "t_span", reason: "must be positive" });
    }
    if !(tol.rtol > 0.0 && tol.rtol <= 1e-6) {
        return Err(Error::InvalidParameter { name: "rtol", reason: "must lie in (0, 1e-6]" });
    }
    if !initial.is_finite() {
        return Err(Error::InvalidParameter { name: "initial state", reason: "must be finite" });
    }
    let n = params.scale();
    let sq = n.sqrt();
    // rates per µs
    let kc = params.kappa_c * 1e-6;
    let ks = params.kappa_s * 1e-6;
    let gm = params.gamma * 1e-6;
    let dc = (params.omega_c - params.omega_d) * 1e-6;
    let ds = (params.omega_s - params.omega_d) * 1e-6;
    let big_g = params.g * sq * 1e-6;
    let v = params.v / sq * 1e-6;

    let rhs = |_t: f64, y: &[f64], d: &mut [f64]| {
        let al = Complex64::new(y[0], y[1]);
        let s = Complex64::new(y[2], y[3]);
        let z = y[4];
        let i = Complex64::i();
        let da = -i * v - Complex64::new(kc, dc) * al - i * big_g * s;
        let ds_ = -Complex64::new(ks, ds) * s + 2.0 * i * big_g * al * z;
        let dz = -2.0 * big_g * (al.conj() * s).im - gm * z;
        d[0] = da.re;
        d[1] = da.im;
        d[2] = ds_.re;
        d[3] = ds_.im;
        d[4] = dz;
    };
    let y0 = [initial.a.re / sq, initial.a.im / sq, initial.s_minus.re / n, initial.s_minus.im / n, initial.s_z / n];
    let grid = ode::uniform_grid(0.0, t_span, tol.n_points.max(2));
    let opts = OdeOptions { rtol: tol.rtol, atol: tol.atol, ..Default::default() };
    let (ys, _) = ode::solve(rhs, 0.0, &y0, &grid, &opts)?;

    let states: Vec<SystemState> = ys
        .iter()
        .map(|y| SystemState {
            a: Complex64::new(y[0], y[1]) * sq,
            s_minus: Complex64::new(y[2], y[3]) * n,
            s_z: y[4] * n,
        })
        .collect();
    let photons: Vec<f64> = states.iter().map(|s| s.a.norm_sqr()).collect();
    let p_out = photons.iter().map(|&ph| output_power(ph, params.kappa_c, params.omega_c, params.coupling_k)).collect();
    Ok(Trajectory { t: grid, states, photons, p_out })
}

/// Closed-form steady-state field for a frozen inversion `s_z` on resonance:
/// a = -iV / (κc - 2g²S_z/κs).
pub fn linear_steady_state(params: &MaxwellBlochParams, s_z: f64) -> Result<Complex64> {
    let denom = params.kappa_c - 2.0 * params.g * params.g * s_z / params.kappa_s;
    if !(denom > 0.0) {
        return Err(Error::AtOrAboveOscillation { margin: denom });
    }
    Ok(Complex64::new(0.0, -params.v / denom))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainTrace {
    pub gain_db: Vec<f64>,
    pub peak_db: f64,
    /// Median gain over the samples at or above the threshold; equals the
    /// peak for a flat-topped response.
    pub plateau_db: f64,
    /// Summed span of contiguous runs at or above the threshold, µs.
    pub duration_us: f64,
}

/// Gain 10·log₁₀(P_out/P_in) along a trajectory.
pub fn amplifier_gain_trace(t: &[f64], p_out: &[f64], p_in: f64, threshold_db: f64) -> Result<GainTrace> {
    if !(p_in > 0.0) {
        return Err(Error::InvalidParameter { name: "p_in", reason: "must be positive" });
    }
    if t.len() != p_out.len() || t.is_empty() {
        return Err(Error::InsufficientData("time and power grids must be non-empty and equal length"));
    }
    let gain_db: Vec<f64> = p_out.iter().map(|p| 10.0 * (p / p_in).log10()).collect();
    let peak_db = gain_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut above: Vec<f64> = gain_db.iter().copied().filter(|&g| g >= threshold_db).collect();
    let plateau_db = if above.is_empty() {
        peak_db
    } else {
        above.sort_by(f64::total_cmp);
        let m = above.len();
        if m % 2 == 1 {
            above[m / 2]
        } else {
            0.5 * (above[m / 2 - 1] + above[m / 2])
        }
    };
    let mut duration_us = 0.0;
    let mut run_start: Option<f64> = None;
    let mut last = 0.0;
    for (&ti, &g) in t.iter().zip(&gain_db) {
        if g >= threshold_db {
            run_start.get_or_insert(ti);
            last = ti;
        } else if let Some(s) = run_start.take() {
            duration_us += last - s;
        }
    }
    if let Some(s) = run_start {
        duration_us += last - s;
    }
    Ok(GainTrace { gain_db, peak_db, plateau_db, duration_us })
}

/// Amplifier response of an initially inverted, empty cavity.
pub fn amplify(params: &MaxwellBlochParams, t_span: f64, tol: &Tolerances) -> Result<Trajectory> {
    integrate(params, t_span, SystemState::inverted(params.n0), tol)
}

/// Undriven evolution from inversion `n0` with a coherence seed |S₋(0)| = `seed`.
pub fn oscillator_burst(params: &MaxwellBlochParams, seed: f64, t_span: f64, tol: &Tolerances) -> Result<Trajectory> {
    if !(seed > 0.0) {
        return Err(Error::InvalidParameter { name: "seed", reason: "must be positive" });
    }
    let p = MaxwellBlochParams { v: 0.0, ..*params };
    let init = SystemState { s_minus: Complex64::new(seed, 0.0), ..SystemState::inverted(p.n0) };
    integrate(&p, t_span, init, tol)
}

/// Default coherence seed √|N0|.
pub fn default_seed(n0: f64) -> f64 {
    n0.abs().max(1.0).sqrt()
}

/// Photon number the seed alone sustains near the linear threshold,
/// g²|S₋(0)|²/(κc + κs)².
pub fn seed_photons(params: &MaxwellBlochParams, seed: f64) -> f64 {
    let k = params.kappa_c + params.kappa_s;
    params.g * params.g * seed * seed / (k * k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstSummary {
    pub burst: bool,
    pub peak_photons: f64,
    pub seed_photons: f64,
    /// µs.
    pub peak_time: f64,
    /// W.
    pub peak_power: f64,
}

/// A burst is a photon peak above ten times the seed level.
pub fn burst_summary(traj: &Trajectory, params: &MaxwellBlochParams, seed: f64) -> BurstSummary {
    let (i, peak) = traj.peak_photons();
    let seed_level = seed_photons(params, seed);
    BurstSummary {
        burst: peak > 10.0 * seed_level,
        peak_photons: peak,
        seed_photons: seed_level,
        peak_time: traj.t[i],
        peak_power: traj.p_out[i],
    }
}

/// N_th = κcκs/(2g²).
pub fn threshold_inversion(params: &MaxwellBlochParams) -> Result<f64> {
    if !(params.g > 0.0) {
        return Err(Error::InvalidParameter { name: "g", reason: "must be positive" });
    }
    Ok(params.kappa_c * params.kappa_s / (2.0 * params.g * params.g))
}

/// Integration window (µs) long enough for a 1% excess above threshold to
/// grow the seeded mode by e² in amplitude.
pub fn onset_horizon(params: &MaxwellBlochParams) -> f64 {
    let k_eff = params.kappa_c * params.kappa_s / (params.kappa_c + params.kappa_s);
    200.0 / k_eff * 1e6
}

/// Smallest N0 that produces a burst within `horizon` µs, located by
/// bisection to relative width `rel_tol`. Depolarization (γ > 0) raises the
/// onset above the linear threshold.
pub fn bisect_burst_onset(params: &MaxwellBlochParams, horizon: f64, rel_tol: f64, tol: &Tolerances) -> Result<f64> {
    let bursts = |n0: f64| -> Result<bool> {
        let p = MaxwellBlochParams { n0, ..*params };
        let seed = default_seed(n0);
        let tr = oscillator_burst(&p, seed, horizon, tol)?;
        Ok(burst_summary(&tr, &p, seed).burst)
    };
    let guess = threshold_inversion(params)?;
    let (mut lo, mut hi) = (0.25 * guess, 4.0 * guess);
    let mut expand = 0;
    while bursts(lo)? {
        lo *= 0.25;
        expand += 1;
        if expand > 20 {
            return Err(Error::NoConvergence { iterations: expand });
        }
    }
    while !bursts(hi)? {
        hi *= 4.0;
        expand += 1;
        if expand > 20 {
            return Err(Error::NoConvergence { iterations: expand });
        }
    }
    let mut iter = 0;
    while (hi - lo) > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if bursts(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
        if iter > 200 {
            return Err(Error::NoConvergence { iterations: iter });
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Peak output power (W) of undriven bursts for each initial inversion.
pub fn peak_power_sweep(
    params: &MaxwellBlochParams,
    n0_values: &[f64],
    t_span: f64,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    n0_values
        .iter()
        .map(|&n0| {
            let p = MaxwellBlochParams { n0, ..*params };
            let seed = default_seed(n0);
            let tr = oscillator_burst(&p, seed, t_span, tol)?;
            Ok(burst_summary(&tr, &p, seed).peak_power)
        })
        .collect()
}

/// Unit-amplitude damped Rabi nutation e^(−Γt)·cos(Ω₁t) on a µs grid,
/// with Ω₁ in rad/s and Γ in 1/s.
pub fn rabi_transient(omega_1: f64, gamma_damp: f64, t_us: &[f64]) -> Vec<f64> {
    let w = omega_1 * 1e-6;
    let g = gamma_damp * 1e-6;
    t_us.iter().map(|&t| (-g * t).exp() * (w * t).cos()).collect()
}

/// Nutation damping Γ = 1/(2T₂) + ε·Ω₁/2π, 1/s, for T₂ in µs.
pub fn rabi_damping_rate(t2_us: f64, epsilon: f64, omega_1: f64) -> f64 {
    1.0 / (2.0 * t2_us * 1e-6) + epsilon * omega_1 / (2.0 * core::f64::consts::PI)
}
