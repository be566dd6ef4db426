// SPDX-License-Identifier: Apache-2.0

//! Physics core for a room-temperature X-band pentacene maser.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure numerical
//! code: the triplet spin Hamiltonian, crystal-mount geometry, field-swept
//! trEPR spectra, the optical pump depth model, the driven Maxwell-Bloch
//! integrator, closed-form device metrics and the least-squares estimators.
//!
//! Units: spin-level frequencies in MHz, resonator and spectrometer
//! frequencies in GHz, fields in mT, times in µs, rates and couplings in SI
//! (1/s, rad/s). Each field documents its unit.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod pump;
pub mod spectra;
pub mod spin;
pub mod threshold;

pub use error::{Error, Result};
