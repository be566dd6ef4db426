// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, AmplifyArgs, Context, FitModel, MetricsArgs, OscillateArgs, SynthArgs};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Artifacts, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Paper,
}

#[derive(Debug, Parser)]
#[command(name = "pentamaser", version, about = "Room-temperature pentacene maser simulator")]
pub struct Cli {
    /// TOML run config, merged over the paper preset.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in parameter set (the default when no config is given).
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed for synthetic data; overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels and transitions of both sites at one field.
    Levels {
        /// |B0| in mT.
        #[arg(long)]
        b0: Option<f64>,
        /// Goniometer angle in degrees.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Field-swept trEPR spectra over a goniometer angle grid.
    RotationPattern {
        /// Comma-separated angles in degrees; replaces the configured grid.
        #[arg(long)]
        thetas: Option<String>,
    },
    /// Driven amplifier transient.
    Amplify {
        #[arg(long, allow_hyphen_values = true)]
        p_in_dbm: Option<f64>,
        #[arg(long)]
        n0: Option<f64>,
        /// µs.
        #[arg(long)]
        t_span: Option<f64>,
    },
    /// Undriven burst in the high-Q resonator.
    Oscillate {
        #[arg(long, allow_hyphen_values = true)]
        n0: Option<f64>,
        #[arg(long)]
        ql: Option<f64>,
        /// µs.
        #[arg(long)]
        t_span: Option<f64>,
        /// Initial |S₋|; defaults to √|N0|.
        #[arg(long)]
        seed_coherence: Option<f64>,
    },
    /// Closed-form device figures of merit.
    Metrics {
        #[arg(long, conflicts_with = "qm_formula")]
        qm_override: Option<f64>,
        /// Ignore any configured Qm override.
        #[arg(long)]
        qm_formula: bool,
        /// K.
        #[arg(long)]
        t_bath: Option<f64>,
    },
    /// Triplet density against depth after the pump pulse.
    PumpProfile {
        /// mJ/cm².
        #[arg(long)]
        fluence: Option<f64>,
    },
    /// Oscillation threshold against loaded Q from pump sweeps.
    ThresholdScan {
        /// Comma-separated loaded Q values.
        #[arg(long)]
        ql: Option<String>,
    },
    /// Fit a model to a two-column CSV.
    Fit(FitArgs),
    /// Write synthetic data from a model, with optional Gaussian noise.
    Synth(SynthCli),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(value_enum)]
    pub model: FitModel,
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCli {
    #[arg(value_enum)]
    pub model: FitModel,
    #[arg(long)]
    pub n: Option<usize>,
    /// Signal-to-noise ratio; omit for noise-free data.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Comma-separated model parameters in fit order.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
}

/// Resolve the config and run the command, returning artifacts that have not
/// been written yet.
pub fn plan(cli: &Cli) -> Result<(RunConfig, Artifacts), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::paper(),
    };
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let resolved = config.resolve()?;
    let ctx = Context { config: &config, resolved: &resolved, format: cli.format };
    let artifacts = match &cli.command {
        Command::Levels { b0, theta } => commands::levels(&ctx, *b0, *theta)?,
        Command::RotationPattern { thetas } => commands::rotation(&ctx, thetas.as_deref())?,
        Command::Amplify { p_in_dbm, n0, t_span } => {
            commands::amplify_cmd(&ctx, &AmplifyArgs { p_in_dbm: *p_in_dbm, n0: *n0, t_span: *t_span })?
        }
        Command::Oscillate { n0, ql, t_span, seed_coherence } => commands::oscillate_cmd(
            &ctx,
            &OscillateArgs { n0: *n0, ql: *ql, t_span: *t_span, seed_coherence: *seed_coherence },
        )?,
        Command::Metrics { qm_override, qm_formula, t_bath } => commands::metrics_cmd(
            &ctx,
            &MetricsArgs { qm_override: *qm_override, qm_formula: *qm_formula, t_bath: *t_bath },
        )?,
        Command::PumpProfile { fluence } => commands::pump_cmd(&ctx, *fluence)?,
        Command::ThresholdScan { ql } => commands::threshold_cmd(&ctx, ql.as_deref())?,
        Command::Fit(a) => commands::fit_cmd(&ctx, a.model, &a.input)?,
        Command::Synth(a) => commands::synth_cmd(
            &ctx,
            &SynthArgs { model: a.model, n: a.n, snr: a.snr, params: a.params.clone(), x_min: a.x_min, x_max: a.x_max },
        )?,
    };
    Ok((config, artifacts))
}

/// Plan, then write everything into the output directory.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let (config, artifacts) = plan(cli)?;
    artifacts.commit(&config.out_dir)
}
