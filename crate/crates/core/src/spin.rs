// SPDX-License-Identifier: Apache-2.0

//! Triplet (S = 1) spin Hamiltonian in the molecular zero-field basis
//! {T_X, T_Y, T_Z}, its eigen-decomposition, sublevel populations and
//! magnetic-dipole transitions.
//!
//! In the zero-field basis the spin-1 operators are purely imaginary,
//! `(S_k)_{ij} = -i ε_{kij}`, so the zero-field part of the Hamiltonian is
//! diagonal: `diag(D/3 - E, D/3 + E, -2D/3)`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::constants::GAMMA_E_PAPER_MHZ_PER_MT;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix3c};

/// Index of the zero-field sublevels in the basis ordering.
pub const T_X: usize = 0;
pub const T_Y: usize = 1;
pub const T_Z: usize = 2;

/// Zero-field splitting, gyromagnetic ratio and ISC populations of a triplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystem {
    /// D, MHz.
    pub d: f64,
    /// E, MHz (sign carried; negative for pentacene).
    pub e: f64,
    /// γₑ/2π, MHz/mT.
    pub gamma_e: f64,
    /// Zero-field populations (p_X, p_Y, p_Z).
    pub zero_field_populations: [f64; 3],
}

impl SpinSystem {
    pub fn new(d: f64, e: f64, gamma_e: f64, zero_field_populations: [f64; 3]) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter { name: "D", reason: "must be positive" });
        }
        if !e.is_finite() {
            return Err(Error::InvalidParameter { name: "E", reason: "must be finite" });
        }
        if !(gamma_e > 0.0) || !gamma_e.is_finite() {
            return Err(Error::InvalidParameter { name: "gamma_e", reason: "must be positive" });
        }
        if zero_field_populations.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter {
                name: "zero_field_populations",
                reason: "each population must lie in [0, 1]",
            });
        }
        let sum: f64 = zero_field_populations.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "zero_field_populations",
                reason: "populations must sum to one",
            });
        }
        Ok(Self { d, e, gamma_e, zero_field_populations })
    }

    /// Pentacene in p-terphenyl: D = 1395.57 MHz, E = −53.35 MHz,
    /// γₑ/2π = 28 MHz/mT, ISC populations 76:16:8.
    pub fn pentacene() -> Self {
        Self { d: 1395.57, e: -53.35, gamma_e: GAMMA_E_PAPER_MHZ_PER_MT, zero_field_populations: [0.76, 0.16, 0.08] }
    }

    /// Zero-field level energies (T_X, T_Y, T_Z), MHz.
    pub fn zero_field_energies(&self) -> [f64; 3] {
        [self.d / 3.0 - self.e, self.d / 3.0 + self.e, -2.0 * self.d / 3.0]
    }

    /// Hamiltonian (MHz) for a static field given in molecular coordinates (mT).
    pub fn hamiltonian(&self, b0_molecular: [f64; 3]) -> Matrix3c {
        let mut h = spin_projection(scale3(b0_molecular, self.gamma_e));
        for (i, e) in self.zero_field_energies().into_iter().enumerate() {
            h[i][i] += Complex64::new(e, 0.0);
        }
        h
    }

    /// Build and diagonalize in one step, keeping the field vector.
    pub fn energy_levels(&self, b0_molecular: [f64; 3]) -> EnergyLevels {
        let h = self.hamiltonian(b0_molecular);
        // Hermitian by construction; the check cannot fail.
        let mut levels = diagonalize(&h).expect("spin Hamiltonian is Hermitian");
        levels.field_molecular = Some(b0_molecular);
        levels
    }

    /// Closed-form levels for a field along the molecular X axis, returned as
    /// `(E₊₁, E₀, E₋₁)` in MHz.
    ///
    /// T_X is untouched by a field along X; the T_Y/T_Z block has mean
    /// `-(D/3 - E)/2` and half-gap `sqrt(((D + E)/2)² + (γB)²)`. Labels follow
    /// the high-field ordering; below the crossing (about 14 mT for pentacene)
    /// E₀ is the top level.
    pub fn canonical_levels_x(&self, b0_mag: f64) -> (f64, f64, f64) {
        let mean = -0.5 * (self.d / 3.0 - self.e);
        let half_gap = (((self.d + self.e) / 2.0).powi(2) + (self.gamma_e * b0_mag).powi(2)).sqrt();
        (mean + half_gap, self.d / 3.0 - self.e, mean - half_gap)
    }

    /// Sudden-projection populations of the field-dressed levels:
    /// `P_k = Σ_i P_i |⟨k|T_i⟩|²`, in the ascending order of `levels`.
    pub fn high_field_populations(&self, levels: &EnergyLevels) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, vec) in levels.eigenvectors.iter().enumerate() {
            out[k] = (0..3).map(|i| self.zero_field_populations[i] * vec[i].norm_sqr()).sum();
        }
        out
    }
}

/// Eigenvalues (ascending, MHz) and eigenvectors in the zero-field basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevels {
    pub eigenvalues: [f64; 3],
    /// `eigenvectors[k][i] = ⟨T_i|k⟩`.
    pub eigenvectors: [[Complex64; 3]; 3],
    pub field_molecular: Option<[f64; 3]>,
}

impl EnergyLevels {
    /// Transition frequency between two levels, MHz.
    pub fn gap(&self, lower: usize, upper: usize) -> f64 {
        self.eigenvalues[upper] - self.eigenvalues[lower]
    }
}

/// A magnetic-dipole transition between two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub lower: usize,
    pub upper: usize,
    /// MHz.
    pub frequency: f64,
    /// `|⟨upper|S·b̂₁|lower⟩|²`.
    pub matrix_element_sq: f64,
    /// `p_lower - p_upper`; positive is absorptive, negative emissive.
    pub population_difference: f64,
}

pub type TransitionSet = Vec<Transition>;

/// `S·n` in the zero-field basis, `(S·n)_{ij} = -i Σ_k ε_{kij} n_k`.
pub fn spin_projection(n: [f64; 3]) -> Matrix3c {
    let z = Complex64::new(0.0, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    let [nx, ny, nz] = n;
    [[z, i(-nz), i(ny)], [i(nz), z, i(-nx)], [i(-ny), i(nx), z]]
}

fn scale3(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Hamiltonian for `system` with field `b0_molecular` (mT).
pub fn build_hamiltonian(system: &SpinSystem, b0_molecular: [f64; 3]) -> Matrix3c {
    system.hamiltonian(b0_molecular)
}

/// Diagonalize a Hermitian 3×3 matrix.
///
/// Eigenvalues come back ascending. Exactly degenerate pairs are ordered by
/// descending `|⟨T_X|v⟩|`; each eigenvector's largest component is made real
/// and positive.
pub fn diagonalize(h: &Matrix3c) -> Result<EnergyLevels> {
    let (vals, u) = linalg::jacobi_hermitian3(h)?;
    let scale = vals.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut cols: [([Complex64; 3], f64); 3] = core::array::from_fn(|k| {
        let mut v = [u[0][k], u[1][k], u[2][k]];
        let big = (0..3).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).unwrap_or(0);
        let phase = v[big] / v[big].norm();
        v.iter_mut().for_each(|c| *c /= phase);
        (v, vals[k])
    });
    cols.sort_by(|a, b| {
        if (a.1 - b.1).abs() <= 1e-12 * scale {
            b.0[T_X].norm().total_cmp(&a.0[T_X].norm())
        } else {
            a.1.total_cmp(&b.1)
        }
    });
    Ok(EnergyLevels {
        eigenvalues: [cols[0].1, cols[1].1, cols[2].1],
        eigenvectors: [cols[0].0, cols[1].0, cols[2].0],
        field_molecular: None,
    })
}

fn unit_operator(b1_direction: [f64; 3]) -> Result<Matrix3c> {
    let norm = b1_direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter { name: "b1_direction", reason: "must be a unit vector" });
    }
    Ok(spin_projection(b1_direction))
}

fn pair(levels: &EnergyLevels, populations: &[f64; 3], op: &Matrix3c, lower: usize, upper: usize) -> Transition {
    let l = &levels.eigenvectors[lower];
    let u = &levels.eigenvectors[upper];
    let mut elem = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            elem += u[i].conj() * op[i][j] * l[j];
        }
    }
    Transition {
        lower,
        upper,
        frequency: levels.gap(lower, upper),
        matrix_element_sq: elem.norm_sqr(),
        population_difference: populations[lower] - populations[upper],
    }
}

/// Adjacent-level transitions `(0,1)` and `(1,2)` with their dipole matrix
/// elements along `b1_direction` (molecular frame, unit norm).
pub fn transitions(levels: &EnergyLevels, populations: &[f64; 3], b1_direction: [f64; 3]) -> Result<TransitionSet> {
    let op = unit_operator(b1_direction)?;
    Ok([(0, 1), (1, 2)].into_iter().map(|(lo, up)| pair(levels, populations, &op, lo, up)).collect())
}

/// All three level pairs `(0,1)`, `(0,2)`, `(1,2)`. The outer pair carries
/// the D+|E| line at zero field.
pub fn all_transitions(levels: &EnergyLevels, populations: &[f64; 3], b1_direction: [f64; 3]) -> Result<TransitionSet> {
    let op = unit_operator(b1_direction)?;
    Ok([(0, 1), (0, 2), (1, 2)].into_iter().map(|(lo, up)| pair(levels, populations, &op, lo, up)).collect())
}
