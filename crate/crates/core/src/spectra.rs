// SPDX-License-Identifier: Apache-2.0

//! Field-swept trEPR spectra of the two pentacene sites.
//!
//! Resonances are bracketed on a ≤0.1 mT grid and refined by bisection.
//! Each line carries the signed intensity `(p_lower - p_upper)·|⟨u|S·b̂₁|l⟩|²`
//! and is broadened by a unit-area profile whose field width is the
//! frequency FWHM divided by the local slope |df/dB|.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::geometry::{self, LabOrientation, Site, SiteFrame, WedgeMount};
use crate::spin::{self, SpinSystem};
#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

/// Coarsest bracketing step, mT.
pub const MAX_GRID_STEP_MT: f64 = 0.1;
/// Resonance condition tolerance, MHz (1 kHz).
pub const RESONANCE_TOL_MHZ: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lineshape {
    Gaussian,
    Lorentzian,
}

impl Lineshape {
    /// Unit-area profile at offset `x` for full width at half maximum `fwhm`.
    pub fn profile(self, x: f64, fwhm: f64) -> f64 {
        match self {
            Lineshape::Gaussian => {
                let sigma = fwhm / (2.0 * (2.0 * LN_2).sqrt());
                (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Lineshape::Lorentzian => {
                let hw = 0.5 * fwhm;
                hw / (PI * (x * x + hw * hw))
            }
        }
    }
}

/// Direction of the microwave field relative to the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B1Geometry {
    /// Horizontal and perpendicular to B₀.
    HorizontalPerpendicular,
    /// Along the goniometer (lab Z) axis.
    Axial,
}

impl B1Geometry {
    pub fn lab_direction(self, orientation: &LabOrientation) -> [f64; 3] {
        match self {
            B1Geometry::HorizontalPerpendicular => orientation.horizontal_perpendicular(),
            B1Geometry::Axial => [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    /// Spectrometer frequency, GHz.
    pub mw_frequency: f64,
    /// Sweep window, mT.
    pub field_min: f64,
    pub field_max: f64,
    pub n_points: usize,
    /// Spin linewidth (FWHM), MHz.
    pub linewidth_fwhm: f64,
    pub lineshape: Lineshape,
    pub b1: B1Geometry,
}

impl SpectrumConfig {
    /// X-band sweep around the maser lines with the measured 64.73 MHz linewidth.
    pub fn x_band_default() -> Self {
        Self {
            mw_frequency: 9.4056,
            field_min: 250.0,
            field_max: 450.0,
            n_points: 2001,
            linewidth_fwhm: 64.73,
            lineshape: Lineshape::Gaussian,
            b1: B1Geometry::HorizontalPerpendicular,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.field_max > self.field_min && self.field_min >= 0.0) {
            return Err(Error::InvalidParameter { name: "field range", reason: "need field_max > field_min >= 0" });
        }
        if self.n_points < 2 {
            return Err(Error::InvalidParameter { name: "n_points", reason: "need at least 2" });
        }
        if !(self.linewidth_fwhm > 0.0) {
            return Err(Error::InvalidParameter { name: "linewidth_fwhm", reason: "must be positive" });
        }
        if !(self.mw_frequency > 0.0) {
            return Err(Error::InvalidParameter { name: "mw_frequency", reason: "must be positive" });
        }
        Ok(())
    }

    pub fn field_axis(&self) -> Vec<f64> {
        let step = (self.field_max - self.field_min) / (self.n_points - 1) as f64;
        (0..self.n_points).map(|i| self.field_min + step * i as f64).collect()
    }
}

/// A located resonance of one adjacent-level transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub lower: usize,
    pub upper: usize,
    /// mT.
    pub field: f64,
    /// Transition frequency at `field` minus the spectrometer frequency, MHz.
    pub residual: f64,
    /// df/dB at `field`, MHz/mT.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub site: Site,
    pub lower: usize,
    pub upper: usize,
    /// mT.
    pub resonance_field: f64,
    /// Negative for emission.
    pub signed_amplitude: f64,
    /// Line FWHM converted to field units, mT.
    pub width_mt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub field: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub lines: Vec<SpectralLine>,
}

impl Spectrum {
    /// Lines merged into resolvable groups: two lines belong to one group when
    /// their fields differ by less than `min_separation` mT. Each group is
    /// reported as (amplitude-weighted mean field, summed amplitude), sorted by field.
    pub fn resolved_lines(&self, min_separation: f64) -> Vec<(f64, f64)> {
        let mut lines: Vec<&SpectralLine> = self.lines.iter().collect();
        lines.sort_by(|a, b| a.resonance_field.total_cmp(&b.resonance_field));
        let mut groups: Vec<(f64, f64, f64, f64)> = Vec::new(); // (sum w·B, sum w, amp, last B)
        for l in lines {
            let w = l.signed_amplitude.abs().max(1e-300);
            match groups.last_mut() {
                Some(g) if l.resonance_field - g.3 < min_separation => {
                    g.0 += w * l.resonance_field;
                    g.1 += w;
                    g.2 += l.signed_amplitude;
                    g.3 = l.resonance_field;
                }
                _ => groups.push((w * l.resonance_field, w, l.signed_amplitude, l.resonance_field)),
            }
        }
        groups.into_iter().map(|g| (g.0 / g.1, g.2)).collect()
    }
}

fn adjacent_gaps(system: &SpinSystem, direction: [f64; 3], b: f64) -> [f64; 2] {
    let field = [direction[0] * b, direction[1] * b, direction[2] * b];
    let lv = spin::diagonalize(&system.hamiltonian(field)).expect("Hermitian by construction");
    [lv.gap(0, 1), lv.gap(1, 2)]
}

/// Locate every field in `[field_min, field_max]` (mT) at which an
/// adjacent-level transition matches `mw_frequency` (MHz) for a static
/// field along the molecular unit vector `direction`.
pub fn resonance_fields(
    system: &SpinSystem,
    direction: [f64; 3],
    mw_frequency: f64,
    field_range: (f64, f64),
) -> Vec<Resonance> {
    let (lo, hi) = field_range;
    let n = (((hi - lo) / MAX_GRID_STEP_MT).ceil() as usize).max(1);
    let step = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut prev_b = lo;
    let mut prev = adjacent_gaps(system, direction, lo).map(|f| f - mw_frequency);
    for i in 1..=n {
        let b = lo + step * i as f64;
        let cur = adjacent_gaps(system, direction, b).map(|f| f - mw_frequency);
        for branch in 0..2 {
            let (fa, fb) = (prev[branch], cur[branch]);
            // a root exactly on a grid node is credited to the interval it closes
            let brackets = (fa < 0.0 && fb >= 0.0) || (fa > 0.0 && fb <= 0.0);
            if !brackets && !(i == 1 && fa == 0.0) {
                continue;
            }
            let root = refine(system, direction, mw_frequency, branch, prev_b, b, fa);
            let residual = adjacent_gaps(system, direction, root)[branch] - mw_frequency;
            if residual.abs() <= RESONANCE_TOL_MHZ {
                let h = 1e-3;
                let slope = (adjacent_gaps(system, direction, root + h)[branch]
                    - adjacent_gaps(system, direction, (root - h).max(0.0))[branch])
                    / (root + h - (root - h).max(0.0));
                out.push(Resonance { lower: branch, upper: branch + 1, field: root, residual, slope });
            }
        }
        prev = cur;
        prev_b = b;
    }
    out
}

fn refine(
    system: &SpinSystem,
    direction: [f64; 3],
    target: f64,
    branch: usize,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
) -> f64 {
    if fa == 0.0 {
        return a;
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let fm = adjacent_gaps(system, direction, m)[branch] - target;
        if fm == 0.0 || (b - a) < 1e-12 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        // |df/dB| never exceeds ~2γ, so this keeps the residual well under 1 kHz
        if (b - a) < RESONANCE_TOL_MHZ / (8.0 * system.gamma_e) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Lines contributed by one site at goniometer angle `theta` (degrees).
pub fn site_lines(config: &SpectrumConfig, system: &SpinSystem, frame: &SiteFrame, theta: f64) -> Vec<SpectralLine> {
    let unit = LabOrientation { theta, b0_mag: 1.0 };
    let direction = geometry::field_in_molecular_frame(&unit, frame);
    let b1 = frame.to_molecular(config.b1.lab_direction(&unit));
    resonance_fields(system, direction, config.mw_frequency * 1e3, (config.field_min, config.field_max))
        .into_iter()
        .map(|r| {
            let levels = system.energy_levels([direction[0] * r.field, direction[1] * r.field, direction[2] * r.field]);
            let pops = system.high_field_populations(&levels);
            let tr = spin::transitions(&levels, &pops, b1).expect("b1 is a unit vector");
            let t = tr[r.lower];
            SpectralLine {
                site: frame.site,
                lower: r.lower,
                upper: r.upper,
                resonance_field: r.field,
                signed_amplitude: t.population_difference * t.matrix_element_sq,
                width_mt: config.linewidth_fwhm / r.slope.abs(),
            }
        })
        .collect()
}

/// Spectrum at goniometer angle `theta` (degrees), summed over both sites.
pub fn simulate_spectrum(
    config: &SpectrumConfig,
    system: &SpinSystem,
    mount: &WedgeMount,
    theta: f64,
) -> Result<Spectrum> {
    config.validate()?;
    let (s1, s2) = geometry::site_frames(mount);
    let mut lines = site_lines(config, system, &s1, theta);
    lines.extend(site_lines(config, system, &s2, theta));
    let field = config.field_axis();
    let amplitude = field
        .iter()
        .map(|&b| {
            lines.iter().map(|l| l.signed_amplitude * config.lineshape.profile(b - l.resonance_field, l.width_mt)).sum()
        })
        .collect();
    Ok(Spectrum { field, amplitude, lines })
}

/// One spectrum per goniometer angle, in the order given.
pub fn rotation_pattern(
    config: &SpectrumConfig,
    system: &SpinSystem,
    mount: &WedgeMount,
    thetas: &[f64],
) -> Result<Vec<(f64, Spectrum)>> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter { name: "theta list", reason: "must not be empty" });
    }
    thetas.iter().map(|&t| simulate_spectrum(config, system, mount, t).map(|s| (t, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> SpectrumConfig {
        SpectrumConfig::x_band_default()
    }

    #[test]
    fn x_axis_resonances() {
        let s = SpinSystem::pentacene();
        let r = resonance_fields(&s, [1.0, 0.0, 0.0], 9405.6, (250.0, 450.0));
        assert_eq!(r.len(), 2);
        assert!((r[0].field - 307.0).abs() < 1.0, "{}", r[0].field);
        let split = r[1].field - r[0].field;
        assert!((split - 55.6).abs() < 0.3, "{split}");
        for x in &r {
            assert!(x.residual.abs() <= RESONANCE_TOL_MHZ);
        }
        // closed-form oracle for the lower line: E0 - E-1 = f
        let (_, e0, em) = s.canonical_levels_x(r[0].field);
        assert!((e0 - em - 9405.6).abs() < 1e-3);
    }

    #[test]
    fn no_resonance_far_above() {
        let s = SpinSystem::pentacene();
        assert!(resonance_fields(&s, [1.0, 0.0, 0.0], 95_000.0, (250.0, 450.0)).is_empty());
    }

    #[test]
    fn theta_zero_single_emissive_absorptive_pair() {
        let s = SpinSystem::pentacene();
        let sp = simulate_spectrum(&cfg(), &s, &WedgeMount::pentacene_design(), 0.0).unwrap();
        assert_eq!(sp.lines.len(), 4);
        let one: Vec<_> = sp.lines.iter().filter(|l| l.site == Site::One).collect();
        let two: Vec<_> = sp.lines.iter().filter(|l| l.site == Site::Two).collect();
        for (a, b) in one.iter().zip(two.iter()) {
            assert!((a.resonance_field - b.resonance_field).abs() < 1e-6);
        }
        let groups = sp.resolved_lines(1.0);
        assert_eq!(groups.len(), 2);
        assert!(groups[0].1 < 0.0 && groups[1].1 > 0.0);
    }

    #[test]
    fn equal_populations_give_flat_spectrum() {
        let third = 1.0 / 3.0;
        let s = SpinSystem { zero_field_populations: [third; 3], ..SpinSystem::pentacene() };
        let sp = simulate_spectrum(&cfg(), &s, &WedgeMount::pentacene_design(), 30.0).unwrap();
        assert!(sp.amplitude.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn profiles_have_unit_area_and_matching_fwhm() {
        for shape in [Lineshape::Gaussian, Lineshape::Lorentzian] {
            let w = 2.0;
            let peak = shape.profile(0.0, w);
            assert_relative_eq!(shape.profile(w / 2.0, w), peak / 2.0, max_relative = 1e-12);
            // integrate over ±2000 widths
            let n = 400_000;
            let h = 8000.0 / n as f64;
            let area: f64 = (0..n).map(|i| shape.profile(-4000.0 + (i as f64 + 0.5) * h, w) * h).sum();
            assert!((area - 1.0).abs() < 1e-3, "{shape:?} {area}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = cfg();
        c.n_points = 1;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.field_min = 500.0;
        assert!(c.validate().is_err());
        let s = SpinSystem::pentacene();
        assert!(rotation_pattern(&cfg(), &s, &WedgeMount::pentacene_design(), &[]).is_err());
    }
}
