// SPDX-License-Identifier: Apache-2.0

//! Wedge mounting and goniometer geometry.
//!
//! Lab frame: Z is the sample-holder (goniometer) axis, the static field is
//! horizontal. With an ideal wedge the molecular X/Y₁ plane of site 1 is
//! horizontal and Z₁ lies along lab Z. Site 2 shares the X axis with its Y
//! axis rotated 60° about X. The goniometer angle θ is counterclockwise seen
//! from +Z, and θ = 0 puts the field along the common X axis.
#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Angle between the short in-plane axes of the two doping sites, degrees.
pub const SITE_Y_ANGLE_DEG: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeMount {
    /// Wedge angle α, degrees, in [0, 90).
    pub alpha: f64,
    /// In-plane angle β between the wedge major axis and crystal b, degrees, in [0, 360).
    pub beta: f64,
    /// Fabricated wedge angle if it differs from `alpha`; the difference
    /// tilts the molecular frames about the common X axis.
    pub wedge_actual: Option<f64>,
}

impl WedgeMount {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&alpha) {
            return Err(Error::InvalidParameter { name: "alpha", reason: "must lie in [0, 90)" });
        }
        if !(0.0..360.0).contains(&beta) {
            return Err(Error::InvalidParameter { name: "beta", reason: "must lie in [0, 360)" });
        }
        Ok(Self { alpha, beta, wedge_actual: None })
    }

    /// α = 15.1°, β = 124° as designed for pentacene:p-terphenyl.
    pub fn pentacene_design() -> Self {
        Self { alpha: 15.1, beta: 124.0, wedge_actual: None }
    }

    pub fn with_wedge_actual(mut self, wedge_actual: f64) -> Self {
        self.wedge_actual = Some(wedge_actual);
        self
    }

    /// Mounting error (degrees) from a fabricated wedge angle.
    pub fn tilt_error(&self) -> f64 {
        self.wedge_actual.map_or(0.0, |w| w - self.alpha)
    }
}

/// Derive (α, β) from the angles between the molecular Z₁ axis and the
/// crystal a, b and c′ axes (degrees).
///
/// α is the complement of ∠c′Z₁. β is the angle whose tangent is
/// `cos∠aZ₁ / cos∠bZ₁`, taken in [0°, 180°); `flip_b_axis` selects the other
/// branch of the π ambiguity.
pub fn wedge_from_crystallography(
    angle_a_z1: f64,
    angle_b_z1: f64,
    angle_cp_z1: f64,
    flip_b_axis: bool,
) -> Result<WedgeMount> {
    let ca = angle_a_z1.to_radians().cos();
    let cb = angle_b_z1.to_radians().cos();
    let cc = angle_cp_z1.to_radians().cos();
    let sum = ca * ca + cb * cb + cc * cc;
    if (sum - 1.0).abs() > 1e-3 {
        return Err(Error::InconsistentDirectionCosines { sum_of_squares: sum });
    }
    let alpha = 90.0 - angle_cp_z1;
    let mut beta = ca.atan2(cb).to_degrees() % 180.0;
    if beta < 0.0 {
        beta += 180.0;
    }
    if flip_b_axis {
        beta += 180.0;
    }
    if beta >= 360.0 {
        beta -= 360.0;
    }
    WedgeMount::new(alpha, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    One = 1,
    Two = 2,
}

impl Site {
    pub fn id(self) -> u8 {
        self as u8
    }
}

/// Rotation from lab coordinates to the molecular (X, Y_m, Z_m) frame of one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteFrame {
    pub site: Site,
    /// Rows are the molecular axes expressed in lab coordinates, so
    /// `molecular = rotation · lab`.
    pub rotation: [[f64; 3]; 3],
}

impl SiteFrame {
    /// Molecular axis `k` (0 = X, 1 = Y, 2 = Z) in lab coordinates.
    pub fn axis(&self, k: usize) -> [f64; 3] {
        self.rotation[k]
    }

    pub fn to_molecular(&self, lab: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        core::array::from_fn(|i| r[i][0] * lab[0] + r[i][1] * lab[1] + r[i][2] * lab[2])
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rotation;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }
}

/// Frame rotated by `deg` about the X axis (rows are the new axes).
fn frame_about_x(deg: f64) -> [[f64; 3]; 3] {
    let (s, c) = deg.to_radians().sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]]
}

fn mul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    core::array::from_fn(|i| core::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

/// Molecular frames of the two inequivalent sites for a given mount.
pub fn site_frames(mount: &WedgeMount) -> (SiteFrame, SiteFrame) {
    let site1 = frame_about_x(mount.tilt_error());
    let site2 = mul3(&frame_about_x(SITE_Y_ANGLE_DEG), &site1);
    (SiteFrame { site: Site::One, rotation: site1 }, SiteFrame { site: Site::Two, rotation: site2 })
}

/// Goniometer setting and static-field magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabOrientation {
    /// θ, degrees.
    pub theta: f64,
    /// |B₀|, mT.
    pub b0_mag: f64,
}

impl LabOrientation {
    pub fn new(theta: f64, b0_mag: f64) -> Result<Self> {
        if !(b0_mag >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "orientation",
                reason: "b0_mag must be non-negative and theta finite",
            });
        }
        Ok(Self { theta, b0_mag })
    }

    /// Unit static-field direction in lab (θ = 0 sample) coordinates.
    pub fn field_direction(&self) -> [f64; 3] {
        let (s, c) = self.theta.to_radians().sin_cos();
        [c, s, 0.0]
    }

    /// Horizontal unit vector perpendicular to the static field.
    pub fn horizontal_perpendicular(&self) -> [f64; 3] {
        let (s, c) = self.theta.to_radians().sin_cos();
        [-s, c, 0.0]
    }
}

/// Static field (mT) in the molecular coordinates of `frame`.
pub fn field_in_molecular_frame(orientation: &LabOrientation, frame: &SiteFrame) -> [f64; 3] {
    let d = orientation.field_direction();
    frame.to_molecular([d[0] * orientation.b0_mag, d[1] * orientation.b0_mag, d[2] * orientation.b0_mag])
}
