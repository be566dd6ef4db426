// SPDX-License-Identifier: Apache-2.0

//! Closed-form maser figures of merit.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::constants::{gamma_e_si, ghz_to_rad_per_s, HBAR, K_B, MU_0, PLANCK, T_REF_NOISE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorParams {
    /// GHz.
    pub f_c: f64,
    pub q0: f64,
    pub qe: f64,
    pub ql: f64,
    pub coupling_k: f64,
    /// mT/√W.
    pub conversion_factor: f64,
    /// cm³.
    pub v_mode: f64,
}

impl ResonatorParams {
    /// Loaded Q and coupling follow from Q0 and Qe.
    pub fn from_q0_qe(f_c: f64, q0: f64, qe: f64, v_mode: f64, conversion_factor: f64) -> Self {
        Self { f_c, q0, qe, ql: 1.0 / (1.0 / q0 + 1.0 / qe), coupling_k: q0 / qe, conversion_factor, v_mode }
    }

    /// Sapphire TE01δ resonator at critical coupling.
    pub fn paper_resonator() -> Self {
        Self::from_q0_qe(9.4056, 2.2e4, 2.2e4, 0.22, 0.70)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f_c", self.f_c),
            ("q0", self.q0),
            ("qe", self.qe),
            ("ql", self.ql),
            ("coupling_k", self.coupling_k),
            ("v_mode", self.v_mode),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be positive and finite" });
            }
        }
        let inv = 1.0 / self.q0 + 1.0 / self.qe;
        if ((1.0 / self.ql - inv) / inv).abs() > 1e-9 {
            return Err(Error::InvalidParameter { name: "ql", reason: "1/QL must equal 1/Q0 + 1/Qe" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMedium {
    /// Inverted spin density, 1/m³.
    pub delta_n: f64,
    /// Normalized transition matrix element.
    pub sigma_sq: f64,
    pub eta: f64,
    /// µs.
    pub t2: f64,
    /// mm³.
    pub v_crystal: f64,
    pub p_upper: f64,
    pub p_lower: f64,
}

impl GainMedium {
    /// 0.1 % pentacene:p-terphenyl at 307 mT with the quoted Δn and η.
    pub fn paper_medium() -> Self {
        Self { delta_n: 3.3e20, sigma_sq: 0.5, eta: 0.027, t2: 4.24, v_crystal: 6.0, p_upper: 0.76, p_lower: 0.12 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_sq > 0.0 && self.sigma_sq <= 1.0) {
            return Err(Error::InvalidParameter { name: "sigma_sq", reason: "must lie in (0, 1]" });
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParameter { name: "eta", reason: "must lie in (0, 1]" });
        }
        if !(self.t2 > 0.0) {
            return Err(Error::InvalidParameter { name: "t2", reason: "must be positive" });
        }
        if !(self.delta_n > 0.0) {
            return Err(Error::InvalidParameter { name: "delta_n", reason: "must be positive" });
        }
        if !(self.v_crystal > 0.0) {
            return Err(Error::InvalidParameter { name: "v_crystal", reason: "must be positive" });
        }
        if !(self.p_upper >= 0.0 && self.p_lower >= 0.0) {
            return Err(Error::InvalidParameter { name: "populations", reason: "must be non-negative" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subthreshold,
    Amplifier,
    Oscillator,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Subthreshold => "subthreshold",
            Regime::Amplifier => "amplifier",
            Regime::Oscillator => "oscillator",
        }
    }
}

/// Qm = 1/(γₑ² μ₀ ħ Δn σ² η T₂), with γₑ/2π in MHz/mT.
pub fn magnetic_q(medium: &GainMedium, gamma_e: f64) -> f64 {
    let g = gamma_e_si(gamma_e);
    1.0 / (g * g * MU_0 * HBAR * medium.delta_n * medium.sigma_sq * medium.eta * medium.t2 * 1e-6)
}

/// Ties go to the lower regime.
pub fn classify_regime(qm: f64, q0: f64, qe: f64) -> Regime {
    let km = 1.0 / qm;
    let k0 = 1.0 / q0;
    if km <= k0 {
        Regime::Subthreshold
    } else if km <= k0 + 1.0 / qe {
        Regime::Amplifier
    } else {
        Regime::Oscillator
    }
}

/// Reflection gain 10·lg[((1/Qe − 1/Q0 + 1/Qm)/(1/Qe + 1/Q0 − 1/Qm))²].
pub fn calculated_gain_db(qm: f64, q0: f64, qe: f64) -> Result<f64> {
    let (km, k0, ke) = (1.0 / qm, 1.0 / q0, 1.0 / qe);
    let den = ke + k0 - km;
    if !(den > 0.0) {
        return Err(Error::AtOrAboveOscillation { margin: den });
    }
    let r = (ke - k0 + km) / den;
    Ok(10.0 * (r * r).log10())
}

/// Amplifier bandwidth f₀(1/Q0 + 1/Qe − 1/Qm), MHz for f₀ in GHz.
pub fn calculated_bandwidth(qm: f64, q0: f64, qe: f64, f0: f64) -> Result<f64> {
    let margin = 1.0 / q0 + 1.0 / qe - 1.0 / qm;
    if !(margin > 0.0) {
        return Err(Error::AtOrAboveOscillation { margin });
    }
    Ok(f0 * 1e3 * margin)
}

/// Spin temperature from tanh(hf/2k_BT) = (p_lower − p_upper)/(p_lower + p_upper),
/// f in GHz. Negative under inversion.
pub fn spin_temperature(p_upper: f64, p_lower: f64, f_s: f64) -> Result<f64> {
    let sum = p_upper + p_lower;
    if !(sum > 0.0) {
        return Err(Error::InvalidParameter { name: "populations", reason: "sum must be positive" });
    }
    if p_upper == p_lower {
        return Err(Error::InfiniteTemperature);
    }
    let x = (p_lower - p_upper) / sum;
    // odd by construction so swapping populations flips the sign exactly
    let t = PLANCK * f_s * 1e9 / (2.0 * K_B * x.abs().atanh());
    Ok(if x < 0.0 { -t } else { t })
}

/// Amplifier noise temperature |T_s| + (Qm/Q0)·T_bath and its noise figure
/// against 290 K.
pub fn noise_temperature(t_s: f64, qm: f64, q0: f64, t_bath: f64) -> (f64, f64) {
    let t_a = t_s.abs() + qm / q0 * t_bath;
    (t_a, 10.0 * (1.0 + t_a / T_REF_NOISE).log10())
}

/// τ_R = 2Q_L/ω_c in µs, f_c in GHz.
pub fn rise_time(ql: f64, f_c: f64) -> f64 {
    2.0 * ql / ghz_to_rad_per_s(f_c) * 1e6
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionFactor {
    /// mT/√W.
    pub lambda: f64,
    pub std_error: f64,
}

/// Λ from Rabi frequencies (rad/s) and powers (W) as the through-origin
/// slope of |B₁| = Ω₁/(√2·γₑ) against √P. γₑ/2π in MHz/mT.
pub fn conversion_factor(omega_1: &[f64], power: &[f64], gamma_e: f64) -> Result<ConversionFactor> {
    if omega_1.len() != power.len() || omega_1.is_empty() {
        return Err(Error::InsufficientData("need equal, non-empty Rabi and power lists"));
    }
    if power.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter { name: "power", reason: "must be positive" });
    }
    let g = gamma_e_si(gamma_e);
    let x: Vec<f64> = power.iter().map(|p| p.sqrt()).collect();
    let y: Vec<f64> = omega_1.iter().map(|w| w / (core::f64::consts::SQRT_2 * g) * 1e3).collect();
    let n = x.len();
    if n == 1 {
        return Ok(ConversionFactor { lambda: y[0] / x[0], std_error: 0.0 });
    }
    if power.iter().all(|&p| p == power[0]) {
        return Err(Error::DegenerateFit("all powers are equal"));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - slope * a).powi(2)).sum();
    let std_error = (rss / (n - 1) as f64 / sxx).sqrt();
    Ok(ConversionFactor { lambda: slope, std_error })
}

/// η = V_crystal/V_mode, mm³ over cm³.
pub fn filling_factor(v_crystal: f64, v_mode: f64) -> f64 {
    v_crystal * 1e-3 / v_mode
}

/// Single-spin coupling γₑ√(μ₀ħω_c/2V_mode), rad/s.
pub fn coupling_from_mode_volume(v_mode: f64, f_c: f64, gamma_e: f64) -> f64 {
    gamma_e_si(gamma_e) * (MU_0 * HBAR * ghz_to_rad_per_s(f_c) / (2.0 * v_mode * 1e-6)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaserMetrics {
    /// Qm evaluated from the medium.
    pub qm_formula: f64,
    /// Qm fed into the regime, gain, bandwidth and noise formulas.
    pub qm: f64,
    pub regime: Regime,
    pub gain_db: Option<f64>,
    pub bandwidth_mhz: Option<f64>,
    pub t_spin: f64,
    pub t_noise: f64,
    pub noise_figure_db: f64,
    pub rise_time_us: f64,
    pub eta_geometric: f64,
    pub g_estimate: f64,
}

/// Evaluate every figure of merit. `qm_override` replaces the formula Qm
/// downstream (e.g. a quoted, rounded value); both are reported.
pub fn evaluate(
    resonator: &ResonatorParams,
    medium: &GainMedium,
    gamma_e: f64,
    t_bath: f64,
    qm_override: Option<f64>,
) -> Result<MaserMetrics> {
    resonator.validate()?;
    medium.validate()?;
    let qm_formula = magnetic_q(medium, gamma_e);
    let qm = qm_override.unwrap_or(qm_formula);
    let regime = classify_regime(qm, resonator.q0, resonator.qe);
    let gain_db = calculated_gain_db(qm, resonator.q0, resonator.qe).ok();
    let bandwidth_mhz = calculated_bandwidth(qm, resonator.q0, resonator.qe, resonator.f_c).ok();
    let t_spin = spin_temperature(medium.p_upper, medium.p_lower, resonator.f_c)?;
    let (t_noise, noise_figure_db) = noise_temperature(t_spin, qm, resonator.q0, t_bath);
    Ok(MaserMetrics {
        qm_formula,
        qm,
        regime,
        gain_db,
        bandwidth_mhz,
        t_spin,
        t_noise,
        noise_figure_db,
        rise_time_us: rise_time(resonator.ql, resonator.f_c),
        eta_geometric: filling_factor(medium.v_crystal, resonator.v_mode),
        g_estimate: coupling_from_mode_volume(resonator.v_mode, resonator.f_c, gamma_e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GAMMA: f64 = 28.0;

    #[test]
    fn qm_from_quoted_medium() {
        let m = GainMedium::paper_medium();
        let qm = magnetic_q(&m, GAMMA);
        assert!((qm / 1.3e4 - 1.0).abs() < 0.02, "{qm}");
        let dbl = GainMedium { delta_n: 2.0 * m.delta_n, ..m };
        assert_relative_eq!(magnetic_q(&dbl, GAMMA), qm / 2.0, max_relative = 1e-12);
        let short = GainMedium { t2: 1e-300, ..m };
        assert!(magnetic_q(&short, GAMMA) > 1e250);
    }

    #[test]
    fn regimes_and_ties() {
        assert_eq!(classify_regime(1.3e4, 2.2e4, 2.2e4), Regime::Amplifier);
        assert_eq!(classify_regime(2.2e4, 2.2e4, 7.0), Regime::Subthreshold);
        assert_eq!(classify_regime(1e-9, 2.2e4, 2.2e4), Regime::Oscillator);
        assert_eq!(classify_regime(1e6, 2.2e4, 2.2e4), Regime::Subthreshold);
        // 1/Qm = 1/Q0 + 1/Qe exactly in binary: Q0 = Qe = 2, Qm = 1
        assert_eq!(classify_regime(1.0, 2.0, 2.0), Regime::Amplifier);
    }

    #[test]
    fn gain_values() {
        let g = calculated_gain_db(1.3e4, 2.2e4, 2.2e4).unwrap();
        assert!((g - 14.8).abs() < 0.2, "{g}");
        for qe in [1e3, 2.2e4, 7e5] {
            assert_eq!(calculated_gain_db(2.2e4, 2.2e4, qe).unwrap(), 0.0);
        }
        assert_eq!(calculated_gain_db(f64::INFINITY, 2.2e4, 2.2e4).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(calculated_gain_db(1e3, 2.2e4, 2.2e4), Err(Error::AtOrAboveOscillation { .. })));
    }

    #[test]
    fn gain_decreases_with_qm_in_amplifier_band() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let qm = 1.11e4 + 50.0 * i as f64;
            let g = calculated_gain_db(qm, 2.2e4, 2.2e4).unwrap();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn gain_and_bandwidth_exist_exactly_below_oscillation() {
        for i in 1..400 {
            let qm = 50.0 * i as f64;
            let r = classify_regime(qm, 2.2e4, 3.1e4);
            let gain_ok = calculated_gain_db(qm, 2.2e4, 3.1e4).is_ok();
            let bw = calculated_bandwidth(qm, 2.2e4, 3.1e4, 9.4);
            assert_eq!(gain_ok, r != Regime::Oscillator, "qm={qm}");
            assert_eq!(bw.as_ref().is_ok_and(|b| *b > 0.0), r != Regime::Oscillator);
        }
    }

    #[test]
    fn bandwidth_values() {
        let bw = calculated_bandwidth(1.3e4, 2.2e4, 2.2e4, 9.4056).unwrap();
        assert!((bw / 0.13 - 1.0).abs() < 0.05, "{bw}");
        let open = calculated_bandwidth(f64::INFINITY, 2.2e4, 2.2e4, 9.4).unwrap();
        assert_relative_eq!(open, 9.4e3 * 2.0 / 2.2e4, max_relative = 1e-12);
        assert!((open - 0.85).abs() < 0.01);
        let edge = calculated_bandwidth(1.1e4 * (1.0 + 1e-9), 2.2e4, 2.2e4, 9.4).unwrap();
        assert!((0.0..1e-6).contains(&edge));
        assert!(calculated_bandwidth(1.0, 2.0, 2.0, 9.4).is_err());
    }

    #[test]
    fn spin_temperature_values() {
        let t = spin_temperature(0.76, 0.12, 9.4056).unwrap();
        assert!((t + 0.24).abs() < 0.01, "{t}");
        let flipped = spin_temperature(0.12, 0.76, 9.4056).unwrap();
        assert_eq!(flipped, -t);
        assert!(matches!(spin_temperature(0.3, 0.3, 9.4), Err(Error::InfiniteTemperature)));
    }

    #[test]
    fn thermal_populations_round_trip() {
        let f = 9.4056;
        for i in 0..=60 {
            let temp = 10f64.powf(3.0 * i as f64 / 60.0);
            let x = PLANCK * f * 1e9 / (K_B * temp);
            let (lower, upper) = (1.0, (-x).exp());
            let t = spin_temperature(upper, lower, f).unwrap();
            assert!((t / temp - 1.0).abs() < 1e-3, "{temp} {t}");
        }
    }

    #[test]
    fn noise_values() {
        let (ta, nf) = noise_temperature(-0.24, 1.3e4, 2.2e4, 290.0);
        assert!((ta - 172.0).abs() < 3.0 && (nf - 2.02).abs() < 0.05, "{ta} {nf}");
        let (ta, nf) = noise_temperature(-0.24, 1.3e4, 2.2e4, 50.0);
        assert!((ta - 30.0).abs() < 1.0 && (nf - 0.43).abs() < 0.03, "{ta} {nf}");
        assert_eq!(noise_temperature(-0.24, 1.3e4, 2.2e4, 0.0).0, 0.24);
        let mut prev = 0.0;
        for tb in [1.0, 10.0, 100.0, 300.0] {
            let (ta, _) = noise_temperature(-0.24, 1.3e4, 2.2e4, tb);
            assert!(ta > prev);
            prev = ta;
        }
    }

    #[test]
    fn rise_times() {
        assert!((rise_time(5e5, 9.4043139) - 17.0).abs() < 0.5);
        assert!((rise_time(1.1e4, 9.4056) - 0.37).abs() < 0.005);
        assert_relative_eq!(rise_time(2.2e4, 9.4), 2.0 * rise_time(1.1e4, 9.4), max_relative = 1e-12);
    }

    #[test]
    fn conversion_factor_regeneration() {
        let g = gamma_e_si(GAMMA);
        for lam in [0.41, 0.70] {
            let powers = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
            let omegas: Vec<f64> =
                powers.iter().map(|p: &f64| core::f64::consts::SQRT_2 * g * lam * 1e-3 * p.sqrt()).collect();
            let c = conversion_factor(&omegas, &powers, GAMMA).unwrap();
            assert_relative_eq!(c.lambda, lam, max_relative = 1e-12);
            assert!(c.std_error < 1e-12);
        }
        let one = conversion_factor(&[1e7], &[0.25], GAMMA).unwrap();
        assert_relative_eq!(one.lambda, 1e7 / (core::f64::consts::SQRT_2 * g) * 1e3 / 0.5, max_relative = 1e-12);
        assert!(matches!(conversion_factor(&[1.0, 2.0], &[0.5, 0.5], GAMMA), Err(Error::DegenerateFit(_))));
        assert!(conversion_factor(&[1.0], &[0.0], GAMMA).is_err());
    }

    #[test]
    fn volumes_and_coupling() {
        assert!((filling_factor(6.0, 0.22) - 0.027).abs() < 0.001);
        assert_relative_eq!(filling_factor(1.0, 1e-3), 1.0, max_relative = 1e-12);
        assert_relative_eq!(filling_factor(3.0, 0.22), filling_factor(6.0, 0.22) / 2.0, max_relative = 1e-12);
        let g = coupling_from_mode_volume(0.22, 9.4056, GAMMA);
        assert!((g / 0.69 - 1.0).abs() < 0.15, "{g}");
        assert_relative_eq!(coupling_from_mode_volume(0.88, 9.4056, GAMMA), g / 2.0, max_relative = 1e-12);
        assert_relative_eq!(coupling_from_mode_volume(0.22, 4.0 * 9.4056, GAMMA), 2.0 * g, max_relative = 1e-12);
    }

    #[test]
    fn evaluate_reports_both_qm() {
        let r = ResonatorParams::paper_resonator();
        assert_relative_eq!(r.ql, 1.1e4, max_relative = 1e-12);
        assert_eq!(r.coupling_k, 1.0);
        let m = evaluate(&r, &GainMedium::paper_medium(), GAMMA, 290.0, Some(1.3e4)).unwrap();
        assert_eq!(m.qm, 1.3e4);
        assert!((m.qm_formula - 1.3e4).abs() < 260.0);
        assert_eq!(m.regime, Regime::Amplifier);
        assert!(m.gain_db.is_some() && m.bandwidth_mhz.is_some());
        let bad = ResonatorParams { ql: 1.0, ..r };
        assert!(bad.validate().is_err());
    }
}
