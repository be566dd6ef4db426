// SPDX-License-Identifier: Apache-2.0

//! Optical pumping and the inversion calibration chain.
//!
//! The pulse is sliced in time and each slice propagates through the
//! crystal cell by cell, absorbing with `σ·n_ground` and bleaching the
//! ground state as it goes. No molecule returns to the ground state within
//! the pulse, so the result depends on fluence only. Absorbed photons become
//! triplets with the ISC yield, of which the T₀ + T₋₁ fraction is kept.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::constants::{C_LIGHT, PLANCK};
use crate::error::{Error, Result};

/// Depth cells across the illuminated thickness.
pub const DEPTH_CELLS: usize = 200;
/// Temporal slices of the pump pulse.
pub const TIME_SLICES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPulse {
    /// mJ/cm².
    pub fluence: f64,
    /// ns.
    pub duration: f64,
    /// nm.
    pub wavelength: f64,
    /// cm².
    pub illuminated_area: f64,
}

impl PumpPulse {
    /// 590 nm, 7 ns, 23.87 mJ/cm².
    pub fn paper_pulse() -> Self {
        Self { fluence: 23.87, duration: 7.0, wavelength: 590.0, illuminated_area: 0.06 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fluence >= 0.0) || !self.fluence.is_finite() {
            return Err(Error::InvalidParameter { name: "fluence", reason: "must be finite and non-negative" });
        }
        for (name, v) in
            [("duration", self.duration), ("wavelength", self.wavelength), ("illuminated_area", self.illuminated_area)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be positive" });
            }
        }
        Ok(())
    }

    /// Photons per m².
    pub fn photon_fluence(&self) -> f64 {
        let e_photon = PLANCK * C_LIGHT / (self.wavelength * 1e-9);
        self.fluence * 10.0 / e_photon
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalMedium {
    /// Small-signal absorption coefficient, 1/mm.
    pub absorption_coefficient: f64,
    /// Pentacene ground-state density, 1/m³.
    pub ground_state_density: f64,
    pub isc_triplet_yield: f64,
    /// Fraction of new triplets in the masing pair T₀ + T₋₁.
    pub active_fraction: f64,
    /// mm.
    pub thickness: f64,
    /// mm³.
    pub crystal_volume: f64,
}

impl OpticalMedium {
    /// 1000 p.p.m. pentacene in p-terphenyl. The ISC yield is a placeholder
    /// until calibrated with [`calibrate_isc_yield`].
    pub fn pentacene_terphenyl() -> Self {
        Self {
            absorption_coefficient: 12.0,
            ground_state_density: 3.2e24,
            isc_triplet_yield: 1.0,
            active_fraction: 0.88,
            thickness: 1.0,
            crystal_volume: 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("absorption_coefficient", self.absorption_coefficient),
            ("ground_state_density", self.ground_state_density),
            ("thickness", self.thickness),
            ("crystal_volume", self.crystal_volume),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be positive" });
            }
        }
        if !(self.isc_triplet_yield > 0.0 && self.isc_triplet_yield <= 1.0) {
            return Err(Error::InvalidParameter { name: "isc_triplet_yield", reason: "must lie in (0, 1]" });
        }
        if !(self.active_fraction > 0.0 && self.active_fraction <= 1.0) {
            return Err(Error::InvalidParameter { name: "active_fraction", reason: "must lie in (0, 1]" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    /// Cell centres, mm.
    pub depth: Vec<f64>,
    /// T₀ + T₋₁ triplet density per cell, 1/m³.
    pub density: Vec<f64>,
    /// mm.
    pub cell_width: f64,
}

impl DepthProfile {
    /// Triplets in the illuminated column of `area` cm².
    pub fn integrate(&self, area: f64) -> f64 {
        self.density.iter().sum::<f64>() * self.cell_width * 1e-3 * area * 1e-4
    }
}

/// Triplet density against depth after the pulse.
pub fn depth_profile(pulse: &PumpPulse, medium: &OpticalMedium) -> Result<DepthProfile> {
    pulse.validate()?;
    medium.validate()?;
    let dz = medium.thickness / DEPTH_CELLS as f64;
    let dz_m = dz * 1e-3;
    let sigma = medium.absorption_coefficient * 1e3 / medium.ground_state_density;
    let mut ground = [medium.ground_state_density; DEPTH_CELLS];
    let mut excited = [0.0f64; DEPTH_CELLS];
    let slice = pulse.photon_fluence() / TIME_SLICES as f64;
    for _ in 0..TIME_SLICES {
        let mut photons = slice;
        for (g, e) in ground.iter_mut().zip(excited.iter_mut()) {
            if photons <= 0.0 {
                break;
            }
            let absorbed = photons * (1.0 - (-sigma * *g * dz_m).exp());
            let per_volume = absorbed / dz_m;
            *g -= per_volume;
            *e += per_volume;
            photons -= absorbed;
        }
    }
    let keep = medium.isc_triplet_yield * medium.active_fraction;
    Ok(DepthProfile {
        depth: (0..DEPTH_CELLS).map(|i| (i as f64 + 0.5) * dz).collect(),
        density: excited.iter().map(|e| e * keep).collect(),
        cell_width: dz,
    })
}

/// Total T₀ + T₋₁ triplets created in the illuminated column.
pub fn total_triplet_yield(pulse: &PumpPulse, medium: &OpticalMedium) -> Result<f64> {
    Ok(depth_profile(pulse, medium)?.integrate(pulse.illuminated_area))
}

/// Medium with the ISC yield set so `pulse` creates `target` triplets.
/// The yield enters linearly, so this is exact.
pub fn calibrate_isc_yield(pulse: &PumpPulse, medium: &OpticalMedium, target: f64) -> Result<OpticalMedium> {
    let unit = OpticalMedium { isc_triplet_yield: 1.0, ..*medium };
    let total = total_triplet_yield(pulse, &unit)?;
    if !(total > 0.0) {
        return Err(Error::InvalidParameter { name: "pulse", reason: "creates no triplets" });
    }
    let y = target / total;
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "isc_triplet_yield",
            reason: "calibration needs a yield in (0, 1]",
        });
    }
    Ok(OpticalMedium { isc_triplet_yield: y, ..*medium })
}

/// Two-level polarization (p_upper − p_lower)/(p_upper + p_lower).
pub fn polarization(p_upper: f64, p_lower: f64) -> Result<f64> {
    let s = p_upper + p_lower;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter { name: "populations", reason: "sum must be positive" });
    }
    Ok((p_upper - p_lower) / s)
}

/// ΔN = polarization · N_total.
pub fn inverted_spins(n_total: f64, polarization: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&polarization) {
        return Err(Error::InvalidParameter { name: "polarization", reason: "must lie in [-1, 1]" });
    }
    Ok(polarization * n_total)
}

/// R = Δω_c/Δω_s and ΔN′ = R·ΔN.
pub fn linewidth_calibration(delta_n: f64, cavity_linewidth: f64, spin_linewidth: f64) -> Result<(f64, f64)> {
    if !(cavity_linewidth > 0.0 && spin_linewidth > 0.0) {
        return Err(Error::InvalidParameter { name: "linewidth", reason: "must be positive" });
    }
    let r = cavity_linewidth / spin_linewidth;
    if r > 1.0 {
        return Err(Error::RatioAboveUnity { ratio: r });
    }
    Ok((r, r * delta_n))
}

/// Δn = ΔN′/V, 1/m³ for V in mm³.
pub fn inverted_density(delta_n_prime: f64, crystal_volume: f64) -> Result<f64> {
    if !(crystal_volume > 0.0) {
        return Err(Error::InvalidParameter { name: "crystal_volume", reason: "must be positive" });
    }
    Ok(delta_n_prime / (crystal_volume * 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn medium() -> OpticalMedium {
        OpticalMedium::pentacene_terphenyl()
    }

    #[test]
    fn zero_fluence_is_dark() {
        let p = PumpPulse { fluence: 0.0, ..PumpPulse::paper_pulse() };
        let prof = depth_profile(&p, &medium()).unwrap();
        assert!(prof.density.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn weak_pump_is_beer_lambert() {
        let p = PumpPulse { fluence: 1e-6, ..PumpPulse::paper_pulse() };
        let m = medium();
        let prof = depth_profile(&p, &m).unwrap();
        let d0 = prof.density[0];
        for (z, d) in prof.depth.iter().zip(&prof.density) {
            if *z > 1.0 / m.absorption_coefficient {
                break;
            }
            let want = d0 * (-m.absorption_coefficient * (z - prof.depth[0])).exp();
            assert!((d / want - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn profile_is_monotone_and_bleaches() {
        let prof = depth_profile(&PumpPulse::paper_pulse(), &medium()).unwrap();
        assert!(prof.density.windows(2).all(|w| w[1] <= w[0]));
        assert!(prof.density.iter().all(|&d| d >= 0.0));
        // surface cells approach the full ground-state density
        let m = medium();
        assert!(prof.density[0] > 0.5 * m.ground_state_density * m.active_fraction);
    }

    #[test]
    fn calibration_hits_target_exactly() {
        let p = PumpPulse::paper_pulse();
        let m = calibrate_isc_yield(&p, &medium(), 2.1e14).unwrap();
        assert!(m.isc_triplet_yield > 0.0 && m.isc_triplet_yield < 1.0);
        let prof = depth_profile(&p, &m).unwrap();
        let total = total_triplet_yield(&p, &m).unwrap();
        assert_eq!(prof.integrate(p.illuminated_area), total);
        assert_relative_eq!(total, 2.1e14, max_relative = 1e-12);
        assert!(calibrate_isc_yield(&p, &medium(), 1e30).is_err());
    }

    #[test]
    fn yield_saturates_with_fluence() {
        let m = medium();
        let y: Vec<f64> = (1..=24)
            .map(|i| {
                let p = PumpPulse { fluence: 10.0 * i as f64, ..PumpPulse::paper_pulse() };
                total_triplet_yield(&p, &m).unwrap()
            })
            .collect();
        let top = y[y.len() - 1];
        assert!(y.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        assert!(y.windows(3).skip(8).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-9 * top));
        // fully bleached column: every molecule excited once
        let ceiling = m.ground_state_density * m.thickness * 1e-3 * 0.06e-4 * m.active_fraction;
        assert_relative_eq!(top, ceiling, max_relative = 1e-6);
    }

    #[test]
    fn calibration_chain() {
        let pol = polarization(0.76, 0.12).unwrap();
        assert!((pol - 0.727).abs() < 5e-4);
        let dn = inverted_spins(2.1e14, 0.73).unwrap();
        assert!((dn - 1.53e14).abs() < 0.01e14);
        assert_eq!(inverted_spins(2.1e14, 0.0).unwrap(), 0.0);
        assert!(inverted_spins(1.0, 1.5).is_err());
        let (r, dnp) = linewidth_calibration(1.5e14, 0.85, 64.73).unwrap();
        assert!((r - 1.31e-2).abs() < 5e-5);
        assert!((dnp / 2.0e12 - 1.0).abs() < 0.02);
        assert_eq!(linewidth_calibration(7.0, 3.0, 3.0).unwrap(), (1.0, 7.0));
        assert_eq!(linewidth_calibration(0.0, 0.85, 64.73).unwrap().1, 0.0);
        assert!(matches!(linewidth_calibration(1.0, 2.0, 1.0), Err(Error::RatioAboveUnity { .. })));
        let rho = inverted_density(2e12, 6.0).unwrap();
        assert!((rho / 3.3e20 - 1.0).abs() < 0.02);
        assert_eq!(inverted_density(0.0, 6.0).unwrap(), 0.0);
        assert_relative_eq!(inverted_density(2e12, 12.0).unwrap(), rho / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = PumpPulse { illuminated_area: 0.0, ..PumpPulse::paper_pulse() };
        assert!(depth_profile(&p, &medium()).is_err());
        let m = OpticalMedium { isc_triplet_yield: 1.5, ..medium() };
        assert!(depth_profile(&PumpPulse::paper_pulse(), &m).is_err());
    }
}
