// SPDX-License-Identifier: Apache-2.0

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix passed to the Hermitian eigensolver is not Hermitian.
    NonHermitianInput { deviation: f64 },
    /// Crystal direction cosines do not form a unit vector.
    InconsistentDirectionCosines { sum_of_squares: f64 },
    /// Linewidth calibration ratio exceeds one.
    RatioAboveUnity { ratio: f64 },
    /// The closed-form gain/bandwidth is undefined at or above oscillation.
    AtOrAboveOscillation { margin: f64 },
    /// Equal populations give an infinite spin temperature.
    InfiniteTemperature,
    /// Adaptive integrator step fell below the floor.
    StepSizeUnderflow { t: f64, h: f64 },
    /// Least-squares fit is rank deficient.
    DegenerateFit(&'static str),
    /// Iterative minimizer hit its iteration cap.
    NoConvergence { iterations: usize },
    /// Not enough data for the requested estimator.
    InsufficientData(&'static str),
    /// Two-segment model does not beat a single line.
    NoBreakpoint { f_ratio: f64 },
    /// A value violates a documented invariant.
    InvalidParameter { name: &'static str, reason: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonHermitianInput { deviation } => {
                write!(f, "matrix is not Hermitian (relative deviation {deviation:e})")
            }
            Error::InconsistentDirectionCosines { sum_of_squares } => {
                write!(f, "direction cosines are inconsistent (sum of squares {sum_of_squares})")
            }
            Error::RatioAboveUnity { ratio } => {
                write!(f, "linewidth ratio {ratio} exceeds one")
            }
            Error::AtOrAboveOscillation { margin } => {
                write!(f, "device is at or above the oscillation threshold (net loss {margin:e})")
            }
            Error::InfiniteTemperature => write!(f, "equal populations: infinite spin temperature"),
            Error::StepSizeUnderflow { t, h } => {
                write!(f, "step size underflow at t = {t} us (h = {h:e} us)")
            }
            Error::DegenerateFit(why) => write!(f, "degenerate fit: {why}"),
            Error::NoConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::InsufficientData(why) => write!(f, "insufficient data: {why}"),
            Error::NoBreakpoint { f_ratio } => {
                write!(f, "no significant breakpoint (F = {f_ratio})")
            }
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
