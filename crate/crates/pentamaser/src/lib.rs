// SPDX-License-Identifier: Apache-2.0

//! Command line front end for `pentamaser-core`: TOML run configs with a
//! built-in paper preset, CSV/JSON artifacts and deterministic output.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 invalid config or input,
//! 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::CliError;
