// SPDX-License-Identifier: Apache-2.0

//! Run configuration. A user file is merged key by key over the embedded
//! paper preset, then every block is checked against the core invariants
//! before any command runs.

use std::path::{Path, PathBuf};

use pentamaser_core::constants::{dbm_to_watts, ghz_to_rad_per_s};
use pentamaser_core::dynamics::{drive_strength, MaxwellBlochParams, Tolerances};
use pentamaser_core::geometry::{LabOrientation, WedgeMount};
use pentamaser_core::metrics::{GainMedium, ResonatorParams};
use pentamaser_core::pump::{OpticalMedium, PumpPulse};
use pentamaser_core::spectra::{B1Geometry, Lineshape, SpectrumConfig};
use pentamaser_core::spin::SpinSystem;
use pentamaser_core::threshold::ScanSettings;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const PAPER_PRESET: &str = include_str!("../presets/paper.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub spin: SpinBlock,
    pub geometry: GeometryBlock,
    pub spectrum: SpectrumBlock,
    pub resonator: ResonatorBlock,
    pub medium: MediumBlock,
    pub pump: PumpBlock,
    pub dynamics: DynamicsBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBlock {
    pub d_mhz: f64,
    pub e_mhz: f64,
    pub gamma_e_mhz_per_mt: f64,
    pub populations: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge_actual_deg: Option<f64>,
    pub theta_deg: f64,
    pub b0_mt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineshapeName {
    Gaussian,
    Lorentzian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum B1Name {
    Horizontal,
    Axial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub mw_frequency_ghz: f64,
    pub field_min_mt: f64,
    pub field_max_mt: f64,
    pub n_points: usize,
    pub linewidth_fwhm_mhz: f64,
    pub lineshape: LineshapeName,
    pub b1: B1Name,
    pub theta_start_deg: f64,
    pub theta_stop_deg: f64,
    pub theta_step_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorBlock {
    pub f_c_ghz: f64,
    pub q0: f64,
    pub qe: f64,
    pub v_mode_cm3: f64,
    pub conversion_factor_mt_per_sqrt_w: f64,
    pub oscillator_ql: f64,
    pub oscillator_f_ghz: f64,
    pub t_bath_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumBlock {
    pub delta_n_per_m3: f64,
    pub sigma_sq: f64,
    pub eta: f64,
    pub t2_us: f64,
    pub v_crystal_mm3: f64,
    pub p_upper: f64,
    pub p_lower: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qm_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpBlock {
    pub fluence_mj_per_cm2: f64,
    pub duration_ns: f64,
    pub wavelength_nm: f64,
    pub illuminated_area_cm2: f64,
    pub absorption_per_mm: f64,
    pub ground_state_density_per_m3: f64,
    pub active_fraction: f64,
    pub thickness_mm: f64,
    pub target_triplets: f64,
    pub cavity_linewidth_mhz: f64,
    pub spin_linewidth_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingUnit {
    Angular,
    Hz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    pub g: f64,
    pub g_unit: CouplingUnit,
    pub gamma_per_s: f64,
    pub n0: f64,
    pub p_in_dbm: f64,
    pub coupling_k: f64,
    pub t_span_us: f64,
    pub gain_threshold_db: f64,
    pub rtol: f64,
    pub atol: f64,
    pub n_points: usize,
    pub scan_ql: Vec<f64>,
    pub scan_max_multiple: f64,
    pub scan_points: usize,
    pub scan_window_us: f64,
}

/// Core objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spin: SpinSystem,
    pub mount: WedgeMount,
    pub orientation: LabOrientation,
    pub spectrum: SpectrumConfig,
    pub thetas: Vec<f64>,
    pub resonator: ResonatorParams,
    pub oscillator_ql: f64,
    pub t_bath: f64,
    pub medium: GainMedium,
    pub qm_override: Option<f64>,
    pub pulse: PumpPulse,
    pub optical: OpticalMedium,
    pub target_triplets: f64,
    pub cavity_linewidth: f64,
    pub spin_linewidth: f64,
    pub amplifier: MaxwellBlochParams,
    pub oscillator: MaxwellBlochParams,
    pub p_in: f64,
    pub t_span: f64,
    pub gain_threshold_db: f64,
    pub tol: Tolerances,
    pub scan_ql: Vec<f64>,
    pub scan: ScanSettings,
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn invalid(what: impl Into<String>) -> CliError {
    CliError::Validation(what.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn paper() -> Self {
        toml::from_str(PAPER_PRESET).expect("embedded preset parses")
    }

    /// Merge `text` over the paper preset.
    pub fn from_toml_over_preset(text: &str) -> Result<Self, CliError> {
        let mut base: toml::Value = toml::from_str(PAPER_PRESET).expect("embedded preset parses");
        let user: toml::Value = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        merge(&mut base, user);
        base.try_into().map_err(|e: toml::de::Error| invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_over_preset(&text)
    }

    pub fn theta_grid(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.spectrum;
        positive("spectrum.theta_step_deg", s.theta_step_deg)?;
        if !(s.theta_start_deg.is_finite() && s.theta_stop_deg.is_finite()) || s.theta_stop_deg < s.theta_start_deg {
            return Err(invalid("spectrum.theta_stop_deg must not precede theta_start_deg"));
        }
        let n = ((s.theta_stop_deg - s.theta_start_deg) / s.theta_step_deg + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| s.theta_start_deg + i as f64 * s.theta_step_deg).collect())
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let sp = &self.spin;
        let spin = SpinSystem::new(sp.d_mhz, sp.e_mhz, sp.gamma_e_mhz_per_mt, sp.populations)?;

        let g = &self.geometry;
        let mut mount = WedgeMount::new(g.alpha_deg, g.beta_deg)?;
        if let Some(w) = g.wedge_actual_deg {
            if !(0.0..90.0).contains(&w) {
                return Err(invalid("geometry.wedge_actual_deg must lie in [0, 90)"));
            }
            mount = mount.with_wedge_actual(w);
        }
        let orientation = LabOrientation::new(g.theta_deg, g.b0_mt)?;

        let s = &self.spectrum;
        let spectrum = SpectrumConfig {
            mw_frequency: s.mw_frequency_ghz,
            field_min: s.field_min_mt,
            field_max: s.field_max_mt,
            n_points: s.n_points,
            linewidth_fwhm: s.linewidth_fwhm_mhz,
            lineshape: match s.lineshape {
                LineshapeName::Gaussian => Lineshape::Gaussian,
                LineshapeName::Lorentzian => Lineshape::Lorentzian,
            },
            b1: match s.b1 {
                B1Name::Horizontal => B1Geometry::HorizontalPerpendicular,
                B1Name::Axial => B1Geometry::Axial,
            },
        };
        spectrum.validate()?;
        let thetas = self.theta_grid()?;

        let r = &self.resonator;
        for (name, v) in [
            ("resonator.f_c_ghz", r.f_c_ghz),
            ("resonator.q0", r.q0),
            ("resonator.qe", r.qe),
            ("resonator.v_mode_cm3", r.v_mode_cm3),
            ("resonator.oscillator_ql", r.oscillator_ql),
            ("resonator.oscillator_f_ghz", r.oscillator_f_ghz),
        ] {
            positive(name, v)?;
        }
        if !(r.t_bath_k >= 0.0) {
            return Err(invalid("resonator.t_bath_k must be non-negative"));
        }
        let resonator =
            ResonatorParams::from_q0_qe(r.f_c_ghz, r.q0, r.qe, r.v_mode_cm3, r.conversion_factor_mt_per_sqrt_w);
        resonator.validate()?;

        let m = &self.medium;
        let medium = GainMedium {
            delta_n: m.delta_n_per_m3,
            sigma_sq: m.sigma_sq,
            eta: m.eta,
            t2: m.t2_us,
            v_crystal: m.v_crystal_mm3,
            p_upper: m.p_upper,
            p_lower: m.p_lower,
        };
        medium.validate()?;
        if let Some(q) = m.qm_override {
            positive("medium.qm_override", q)?;
        }

        let p = &self.pump;
        let pulse = PumpPulse {
            fluence: p.fluence_mj_per_cm2,
            duration: p.duration_ns,
            wavelength: p.wavelength_nm,
            illuminated_area: p.illuminated_area_cm2,
        };
        pulse.validate()?;
        let optical = OpticalMedium {
            absorption_coefficient: p.absorption_per_mm,
            ground_state_density: p.ground_state_density_per_m3,
            isc_triplet_yield: 1.0,
            active_fraction: p.active_fraction,
            thickness: p.thickness_mm,
            crystal_volume: m.v_crystal_mm3,
        };
        optical.validate()?;
        positive("pump.target_triplets", p.target_triplets)?;
        positive("pump.cavity_linewidth_mhz", p.cavity_linewidth_mhz)?;
        positive("pump.spin_linewidth_mhz", p.spin_linewidth_mhz)?;

        let d = &self.dynamics;
        let g_rad = match d.g_unit {
            CouplingUnit::Angular => d.g,
            CouplingUnit::Hz => 2.0 * std::f64::consts::PI * d.g,
        };
        positive("dynamics.t_span_us", d.t_span_us)?;
        if !(d.p_in_dbm.is_finite()) {
            return Err(invalid("dynamics.p_in_dbm must be finite"));
        }
        if !(d.gain_threshold_db.is_finite()) {
            return Err(invalid("dynamics.gain_threshold_db must be finite"));
        }
        if !(d.rtol > 0.0 && d.rtol <= 1e-6) || !(d.atol > 0.0) {
            return Err(invalid("dynamics.rtol must lie in (0, 1e-6] and atol must be positive"));
        }
        if d.n_points < 2 {
            return Err(invalid("dynamics.n_points must be at least 2"));
        }
        let omega = ghz_to_rad_per_s(r.f_c_ghz);
        let kappa_c = omega / resonator.ql;
        let p_in = dbm_to_watts(d.p_in_dbm);
        let amplifier = MaxwellBlochParams {
            omega_s: omega,
            omega_c: omega,
            omega_d: omega,
            g: g_rad,
            kappa_c,
            kappa_s: 2.0 / (m.t2_us * 1e-6),
            gamma: d.gamma_per_s,
            v: drive_strength(p_in, kappa_c, omega),
            n0: d.n0,
            coupling_k: d.coupling_k,
        };
        amplifier.validate()?;
        let omega_o = ghz_to_rad_per_s(r.oscillator_f_ghz);
        let oscillator = MaxwellBlochParams {
            omega_s: omega_o,
            omega_c: omega_o,
            omega_d: omega_o,
            kappa_c: omega_o / r.oscillator_ql,
            v: 0.0,
            ..amplifier
        };
        oscillator.validate()?;

        if d.scan_ql.len() < 3 {
            return Err(invalid("dynamics.scan_ql needs at least three values"));
        }
        for &q in &d.scan_ql {
            positive("dynamics.scan_ql", q)?;
        }
        if d.scan_points < 6 || !(d.scan_max_multiple > 1.0) {
            return Err(invalid("dynamics.scan_points must be >= 6 and scan_max_multiple > 1"));
        }
        positive("dynamics.scan_window_us", d.scan_window_us)?;

        if self.out_dir.as_os_str().is_empty() {
            return Err(invalid("out_dir must not be empty"));
        }

        Ok(Resolved {
            spin,
            mount,
            orientation,
            spectrum,
            thetas,
            resonator,
            oscillator_ql: r.oscillator_ql,
            t_bath: r.t_bath_k,
            medium,
            qm_override: m.qm_override,
            pulse,
            optical,
            target_triplets: p.target_triplets,
            cavity_linewidth: p.cavity_linewidth_mhz,
            spin_linewidth: p.spin_linewidth_mhz,
            amplifier,
            oscillator,
            p_in,
            t_span: d.t_span_us,
            gain_threshold_db: d.gain_threshold_db,
            tol: Tolerances { rtol: d.rtol, atol: d.atol, n_points: d.n_points },
            scan_ql: d.scan_ql.clone(),
            scan: ScanSettings { max_multiple: d.scan_max_multiple, n_points: d.scan_points, window: d.scan_window_us },
        })
    }
}
