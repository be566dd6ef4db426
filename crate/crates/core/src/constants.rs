// SPDX-License-Identifier: Apache-2.0

//! Physical constants (CODATA 2018, exact where defined) and unit helpers.

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Electron gyromagnetic ratio over 2π used throughout the maser literature, MHz/mT.
pub const GAMMA_E_PAPER_MHZ_PER_MT: f64 = 28.0;
/// CODATA free-electron value of γₑ/2π, MHz/mT.
pub const GAMMA_E_CODATA_MHZ_PER_MT: f64 = 28.024_951_4;

/// Noise-figure reference temperature, K.
pub const T_REF_NOISE: f64 = 290.0;

/// Angular frequency (rad/s) from a frequency in GHz.
pub fn ghz_to_rad_per_s(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz * 1e9
}

/// Angular frequency (rad/s) from a frequency in MHz.
pub fn mhz_to_rad_per_s(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e6
}

/// γₑ in rad·s⁻¹·T⁻¹ from γₑ/2π in MHz/mT.
pub fn gamma_e_si(gamma_mhz_per_mt: f64) -> f64 {
    // MHz/mT == GHz/T
    2.0 * PI * gamma_mhz_per_mt * 1e9
}

/// Power in watts from dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Power in dBm from watts.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}
