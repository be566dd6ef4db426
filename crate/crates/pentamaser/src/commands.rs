// SPDX-License-Identifier: Apache-2.0

//! Subcommand bodies. Each returns its artifacts without writing them.

use std::f64::consts::PI;
use std::path::Path;

use pentamaser_core::constants::watts_to_dbm;
use pentamaser_core::dynamics::{
    amplifier_gain_trace, amplify, bisect_burst_onset, burst_summary, default_seed, linear_steady_state, onset_horizon,
    oscillator_burst, threshold_inversion, MaxwellBlochParams, Trajectory,
};
use pentamaser_core::fitting::{
    fit_damped_oscillation, fit_double_lorentzian, fit_line, fit_lorentzian, fit_piecewise_linear, t2_and_epsilon,
    DampedCosine, DoubleLorentzian, FitResult, Hinge, Line, Lorentzian, Model,
};
use pentamaser_core::geometry::{field_in_molecular_frame, site_frames, LabOrientation};
use pentamaser_core::metrics::{evaluate, rise_time};
use pentamaser_core::pump::{
    calibrate_isc_yield, depth_profile, inverted_density, inverted_spins, linewidth_calibration, polarization,
    PumpPulse,
};
use pentamaser_core::spectra::rotation_pattern;
use pentamaser_core::spin::all_transitions;
use pentamaser_core::threshold::threshold_scan;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::config::{Resolved, RunConfig};
use crate::error::CliError;
use crate::output::{Artifacts, Format, Table};

/// Everything a command needs besides its own arguments.
pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub resolved: &'a Resolved,
    pub format: Format,
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{name} must be positive")))
    }
}

/// Comma-separated numbers; an empty list is a validation error.
pub fn parse_list(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Validation(format!("{name} must not be empty")));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Validation(format!("{name}: cannot parse '{s}'")))
        })
        .collect()
}

// ---------------------------------------------------------------- levels

#[derive(Serialize)]
struct LevelRow {
    level: usize,
    energy_mhz: f64,
    population: f64,
}

#[derive(Serialize)]
struct TransitionRow {
    lower: usize,
    upper: usize,
    frequency_mhz: f64,
    matrix_element_sq: f64,
    population_difference: f64,
}

#[derive(Serialize)]
struct SiteLevels {
    site: u8,
    levels: Vec<LevelRow>,
    transitions: Vec<TransitionRow>,
}

#[derive(Serialize)]
struct LevelsReport {
    b0_mt: f64,
    theta_deg: f64,
    sites: Vec<SiteLevels>,
}

pub fn levels(ctx: &Context, b0: Option<f64>, theta: Option<f64>) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    let orientation = LabOrientation::new(
        finite("theta", theta.unwrap_or(r.orientation.theta))?,
        b0.unwrap_or(r.orientation.b0_mag),
    )?;
    let (s1, s2) = site_frames(&r.mount);
    let mut sites = Vec::new();
    let mut lt = Table::new(&["site", "level", "energy_MHz", "population"]);
    let mut tt = Table::new(&["site", "lower", "upper", "frequency_MHz", "matrix_element_sq", "population_difference"]);
    for frame in [s1, s2] {
        let field = field_in_molecular_frame(&orientation, &frame);
        let lv = r.spin.energy_levels(field);
        let pops = r.spin.high_field_populations(&lv);
        let b1 = frame.to_molecular(r.spectrum.b1.lab_direction(&orientation));
        let tr = all_transitions(&lv, &pops, b1)?;
        let id = frame.site.id();
        for k in 0..3 {
            lt.push(vec![id as f64, k as f64, lv.eigenvalues[k], pops[k]]);
        }
        for t in &tr {
            tt.push(vec![
                id as f64,
                t.lower as f64,
                t.upper as f64,
                t.frequency,
                t.matrix_element_sq,
                t.population_difference,
            ]);
        }
        sites.push(SiteLevels {
            site: id,
            levels: (0..3).map(|k| LevelRow { level: k, energy_mhz: lv.eigenvalues[k], population: pops[k] }).collect(),
            transitions: tr
                .iter()
                .map(|t| TransitionRow {
                    lower: t.lower,
                    upper: t.upper,
                    frequency_mhz: t.frequency,
                    matrix_element_sq: t.matrix_element_sq,
                    population_difference: t.population_difference,
                })
                .collect(),
        });
    }
    let mut out = Artifacts::new();
    if ctx.format == Format::Csv {
        out.csv("levels.csv", &lt)?;
        out.csv("transitions.csv", &tt)?;
    }
    let report = LevelsReport { b0_mt: orientation.b0_mag, theta_deg: orientation.theta, sites };
    out.json("levels.json", "levels", ctx.config, report)?;
    Ok(out)
}

// ------------------------------------------------------ rotation-pattern

#[derive(Serialize)]
struct LineEntry {
    site: u8,
    lower: usize,
    upper: usize,
    field_mt: f64,
    amplitude: f64,
    width_mt: f64,
    emissive: bool,
}

#[derive(Serialize)]
struct ThetaEntry {
    theta_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    lines: Vec<LineEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<Table>,
}

#[derive(Serialize)]
struct RotationManifest {
    n_theta: usize,
    entries: Vec<ThetaEntry>,
}

pub fn spectrum_file_name(theta: f64) -> String {
    format!("spectrum_theta_{theta:05.1}.csv")
}

pub fn rotation(ctx: &Context, thetas: Option<&str>) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    let grid = match thetas {
        Some(t) => parse_list("thetas", t)?,
        None => r.thetas.clone(),
    };
    let pattern = rotation_pattern(&r.spectrum, &r.spin, &r.mount, &grid)?;
    let mut out = Artifacts::new();
    let mut entries = Vec::new();
    for (theta, sp) in &pattern {
        let mut table = Table::new(&["field_mT", "amplitude"]);
        for (f, a) in sp.field.iter().zip(&sp.amplitude) {
            table.push(vec![*f, *a]);
        }
        let lines = sp
            .lines
            .iter()
            .map(|l| LineEntry {
                site: l.site.id(),
                lower: l.lower,
                upper: l.upper,
                field_mt: l.resonance_field,
                amplitude: l.signed_amplitude,
                width_mt: l.width_mt,
                emissive: l.signed_amplitude < 0.0,
            })
            .collect();
        let (file, spectrum) = match ctx.format {
            Format::Csv => {
                let name = spectrum_file_name(*theta);
                out.csv(&name, &table)?;
                (Some(name), None)
            }
            Format::Json => (None, Some(table)),
        };
        entries.push(ThetaEntry { theta_deg: *theta, file, lines, spectrum });
    }
    out.json(
        "rotation_pattern.json",
        "rotation-pattern",
        ctx.config,
        RotationManifest { n_theta: entries.len(), entries },
    )?;
    Ok(out)
}

// ------------------------------------------------------ amplify/oscillate

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut t = Table::new(&["t_us", "re_a", "im_a", "re_sminus", "im_sminus", "sz", "photons", "p_out_W"]);
    for i in 0..tr.t.len() {
        let s = &tr.states[i];
        t.push(vec![tr.t[i], s.a.re, s.a.im, s.s_minus.re, s.s_minus.im, s.s_z, tr.photons[i], tr.p_out[i]]);
    }
    t
}

#[derive(Serialize)]
struct AmplifySummary {
    p_in_dbm: f64,
    n0: f64,
    t_span_us: f64,
    threshold_db: f64,
    peak_gain_db: f64,
    plateau_gain_db: f64,
    duration_us: f64,
    peak_delay_us: f64,
    /// Steady-state gain of the same cavity with no inversion.
    unpumped_gain_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<Table>,
}

pub struct AmplifyArgs {
    pub p_in_dbm: Option<f64>,
    pub n0: Option<f64>,
    pub t_span: Option<f64>,
}

pub fn amplify_cmd(ctx: &Context, args: &AmplifyArgs) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    let mut p = r.amplifier;
    let mut p_in = r.p_in;
    if let Some(dbm) = args.p_in_dbm {
        p_in = pentamaser_core::constants::dbm_to_watts(finite("p-in-dbm", dbm)?);
        p.v = pentamaser_core::dynamics::drive_strength(p_in, p.kappa_c, p.omega_c);
    }
    if let Some(n0) = args.n0 {
        p.n0 = finite("n0", n0)?;
    }
    let t_span = match args.t_span {
        Some(t) => positive("t-span", t)?,
        None => r.t_span,
    };
    let tr = amplify(&p, t_span, &r.tol)?;
    let trace = amplifier_gain_trace(&tr.t, &tr.p_out, p_in, r.gain_threshold_db)?;
    let i_peak =
        trace.gain_db.iter().enumerate().fold(0, |best, (i, g)| if *g > trace.gain_db[best] { i } else { best });
    let empty = MaxwellBlochParams { n0: 0.0, ..p };
    let a0 = linear_steady_state(&empty, 0.0)?;
    let p0 = pentamaser_core::dynamics::output_power(a0.norm_sqr(), p.kappa_c, p.omega_c, p.coupling_k);
    let table = trajectory_table(&tr);
    let summary = AmplifySummary {
        p_in_dbm: watts_to_dbm(p_in),
        n0: p.n0,
        t_span_us: t_span,
        threshold_db: r.gain_threshold_db,
        peak_gain_db: trace.peak_db,
        plateau_gain_db: trace.plateau_db,
        duration_us: trace.duration_us,
        peak_delay_us: tr.t[i_peak],
        unpumped_gain_db: 10.0 * (p0 / p_in).log10(),
        trajectory: (ctx.format == Format::Json).then(|| table.clone()),
    };
    let mut out = Artifacts::new();
    if ctx.format == Format::Csv {
        out.csv("amplify_trajectory.csv", &table)?;
    }
    out.json("amplify_summary.json", "amplify", ctx.config, summary)?;
    Ok(out)
}

#[derive(Serialize)]
struct OscillateSummary {
    n0: f64,
    q_loaded: f64,
    threshold_inversion: f64,
    seed_coherence: f64,
    burst: bool,
    peak_photons: f64,
    seed_photons: f64,
    peak_time_us: f64,
    peak_power_w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<Table>,
}

pub struct OscillateArgs {
    pub n0: Option<f64>,
    pub ql: Option<f64>,
    pub t_span: Option<f64>,
    pub seed_coherence: Option<f64>,
}

pub fn oscillate_cmd(ctx: &Context, args: &OscillateArgs) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    let mut p = r.oscillator;
    let mut ql = r.oscillator_ql;
    if let Some(q) = args.ql {
        ql = positive("ql", q)?;
        p = p.with_loaded_q(ql);
    }
    if let Some(n0) = args.n0 {
        p.n0 = finite("n0", n0)?;
    }
    let t_span = match args.t_span {
        Some(t) => positive("t-span", t)?,
        None => r.t_span,
    };
    let seed = match args.seed_coherence {
        Some(s) => positive("seed-coherence", s)?,
        None => default_seed(p.n0),
    };
    let tr = oscillator_burst(&p, seed, t_span, &r.tol)?;
    let b = burst_summary(&tr, &p, seed);
    let table = trajectory_table(&tr);
    let summary = OscillateSummary {
        n0: p.n0,
        q_loaded: ql,
        threshold_inversion: threshold_inversion(&p)?,
        seed_coherence: seed,
        burst: b.burst,
        peak_photons: b.peak_photons,
        seed_photons: b.seed_photons,
        peak_time_us: b.peak_time,
        peak_power_w: b.peak_power,
        trajectory: (ctx.format == Format::Json).then(|| table.clone()),
    };
    let mut out = Artifacts::new();
    if ctx.format == Format::Csv {
        out.csv("oscillate_trajectory.csv", &table)?;
    }
    out.json("oscillate_summary.json", "oscillate", ctx.config, summary)?;
    Ok(out)
}

// --------------------------------------------------------------- metrics

#[derive(Serialize)]
struct MetricsReport {
    qm_formula: f64,
    qm: f64,
    qm_source: &'static str,
    regime: &'static str,
    gain_db: Option<f64>,
    bandwidth_mhz: Option<f64>,
    spin_temperature_k: f64,
    bath_temperature_k: f64,
    noise_temperature_k: f64,
    noise_figure_db: f64,
    loaded_q: f64,
    rise_time_us: f64,
    oscillator_loaded_q: f64,
    oscillator_rise_time_us: f64,
    filling_factor: f64,
    g_estimate_rad_per_s: f64,
}

pub struct MetricsArgs {
    pub qm_override: Option<f64>,
    pub qm_formula: bool,
    pub t_bath: Option<f64>,
}

pub fn metrics_cmd(ctx: &Context, args: &MetricsArgs) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    let qm_override = if args.qm_formula {
        None
    } else if let Some(q) = args.qm_override {
        Some(positive("qm-override", q)?)
    } else {
        r.qm_override
    };
    let t_bath = match args.t_bath {
        Some(t) if t >= 0.0 && t.is_finite() => t,
        Some(_) => return Err(CliError::Validation("t-bath must be non-negative".into())),
        None => r.t_bath,
    };
    let m = evaluate(&r.resonator, &r.medium, r.spin.gamma_e, t_bath, qm_override)?;
    let report = MetricsReport {
        qm_formula: m.qm_formula,
        qm: m.qm,
        qm_source: if qm_override.is_some() { "override" } else { "formula" },
        regime: m.regime.as_str(),
        gain_db: m.gain_db,
        bandwidth_mhz: m.bandwidth_mhz,
        spin_temperature_k: m.t_spin,
        bath_temperature_k: t_bath,
        noise_temperature_k: m.t_noise,
        noise_figure_db: m.noise_figure_db,
        loaded_q: r.resonator.ql,
        rise_time_us: m.rise_time_us,
        oscillator_loaded_q: r.oscillator_ql,
        oscillator_rise_time_us: rise_time(r.oscillator_ql, r.oscillator.omega_c / (2.0 * PI * 1e9)),
        filling_factor: m.eta_geometric,
        g_estimate_rad_per_s: m.g_estimate,
    };
    let mut out = Artifacts::new();
    out.json("metrics.json", "metrics", ctx.config, report)?;
    Ok(out)
}

// ---------------------------------------------------------- pump-profile

#[derive(Serialize)]
struct PumpReport {
    fluence_mj_per_cm2: f64,
    photon_fluence_per_m2: f64,
    isc_triplet_yield: f64,
    total_triplets: f64,
    polarization: f64,
    inverted_spins: f64,
    linewidth_ratio: f64,
    effective_inverted_spins: f64,
    inverted_density_per_m3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Table>,
}

pub fn pump_cmd(ctx: &Context, fluence: Option<f64>) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    // the yield is calibrated at the configured pulse and then held fixed
    let optical = calibrate_isc_yield(&r.pulse, &r.optical, r.target_triplets)?;
    let pulse = match fluence {
        Some(f) if f >= 0.0 && f.is_finite() => PumpPulse { fluence: f, ..r.pulse },
        Some(_) => return Err(CliError::Validation("fluence must be non-negative".into())),
        None => r.pulse,
    };
    let profile = depth_profile(&pulse, &optical)?;
    let total = profile.integrate(pulse.illuminated_area);
    let pol = polarization(r.medium.p_upper, r.medium.p_lower)?;
    let dn = inverted_spins(total, pol)?;
    let (ratio, dn_eff) = linewidth_calibration(dn, r.cavity_linewidth, r.spin_linewidth)?;
    let density = inverted_density(dn_eff, optical.crystal_volume)?;
    let mut table = Table::new(&["depth_mm", "triplet_density_per_m3"]);
    for (z, n) in profile.depth.iter().zip(&profile.density) {
        table.push(vec![*z, *n]);
    }
    let report = PumpReport {
        fluence_mj_per_cm2: pulse.fluence,
        photon_fluence_per_m2: pulse.photon_fluence(),
        isc_triplet_yield: optical.isc_triplet_yield,
        total_triplets: total,
        polarization: pol,
        inverted_spins: dn,
        linewidth_ratio: ratio,
        effective_inverted_spins: dn_eff,
        inverted_density_per_m3: density,
        profile: (ctx.format == Format::Json).then(|| table.clone()),
    };
    let mut out = Artifacts::new();
    if ctx.format == Format::Csv {
        out.csv("pump_profile.csv", &table)?;
    }
    out.json("pump_summary.json", "pump-profile", ctx.config, report)?;
    Ok(out)
}

// -------------------------------------------------------- threshold-scan

#[derive(Serialize)]
struct ScanPointReport {
    q_loaded: f64,
    linear_threshold: f64,
    threshold: f64,
    hinge_slope_left: f64,
    hinge_slope_right: f64,
    /// Burst onset with depolarization switched off, by bisection.
    onset_without_depolarization: f64,
}

#[derive(Serialize)]
struct ScanReport {
    points: Vec<ScanPointReport>,
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

pub fn threshold_cmd(ctx: &Context, ql: Option<&str>) -> Result<Artifacts, CliError> {
    let r = ctx.resolved;
    let q_values = match ql {
        Some(t) => parse_list("ql", t)?,
        None => r.scan_ql.clone(),
    };
    if q_values.len() < 3 || q_values.iter().any(|q| !(*q > 0.0)) {
        return Err(CliError::Validation("ql needs at least three positive values".into()));
    }
    let scan = threshold_scan(&r.oscillator, &q_values, &r.scan, &r.tol)?;
    let mut table = Table::new(&["q_loaded", "n0", "peak_power_W"]);
    let mut points = Vec::new();
    for pt in &scan.points {
        for (n0, pw) in pt.n0.iter().zip(&pt.peak_power) {
            table.push(vec![pt.q_loaded, *n0, *pw]);
        }
        let lossless = MaxwellBlochParams { gamma: 0.0, ..r.oscillator.with_loaded_q(pt.q_loaded) };
        let onset = bisect_burst_onset(&lossless, onset_horizon(&lossless), 1e-3, &r.tol)?;
        points.push(ScanPointReport {
            q_loaded: pt.q_loaded,
            linear_threshold: pt.linear_threshold,
            threshold: pt.threshold,
            hinge_slope_left: pt.hinge.params[1] / pt.linear_threshold,
            hinge_slope_right: pt.hinge.params[2] / pt.linear_threshold,
            onset_without_depolarization: onset,
        });
    }
    let report =
        ScanReport { points, slope: scan.line.params[0], intercept: scan.line.params[1], r_squared: scan.r_squared };
    let mut out = Artifacts::new();
    if ctx.format == Format::Csv {
        out.csv("threshold_scan.csv", &table)?;
    }
    out.json("threshold_scan.json", "threshold-scan", ctx.config, report)?;
    Ok(out)
}

// ------------------------------------------------------------ fit, synth

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitModel {
    /// A·e^(−Γt)·cos(Ωt + φ) + c, t in µs.
    DampedCosine,
    Lorentzian,
    DoubleLorentzian,
    /// Continuous two-segment line.
    Hinge,
    Line,
    /// Line of nutation damping Γ (1/µs) against Ω₁/2π (MHz), reported as T₂ and ε.
    T2Line,
}

impl FitModel {
    pub fn slug(self) -> &'static str {
        match self {
            FitModel::DampedCosine => "damped_cosine",
            FitModel::Lorentzian => "lorentzian",
            FitModel::DoubleLorentzian => "double_lorentzian",
            FitModel::Hinge => "hinge",
            FitModel::Line => "line",
            FitModel::T2Line => "t2_line",
        }
    }

    fn names(self) -> &'static [&'static str] {
        match self {
            FitModel::DampedCosine => DampedCosine::NAMES,
            FitModel::Lorentzian => Lorentzian::NAMES,
            FitModel::DoubleLorentzian => DoubleLorentzian::NAMES,
            FitModel::Hinge => Hinge::NAMES,
            FitModel::Line | FitModel::T2Line => Line::NAMES,
        }
    }

    fn eval(self, p: &[f64], x: f64) -> f64 {
        match self {
            FitModel::DampedCosine => DampedCosine.eval(p, x),
            FitModel::Lorentzian => Lorentzian.eval(p, x),
            FitModel::DoubleLorentzian => DoubleLorentzian.eval(p, x),
            FitModel::Hinge => Hinge.eval(p, x),
            FitModel::Line | FitModel::T2Line => Line.eval(p, x),
        }
    }

    /// Default truth and abscissa range for `synth`.
    fn synth_defaults(self) -> (Vec<f64>, f64, f64, usize) {
        match self {
            FitModel::DampedCosine => (vec![1.0, 0.2, 2.0 * PI * 0.8, 0.0, 0.0], 0.0, 10.0, 400),
            FitModel::Lorentzian => (vec![0.0, 0.34, 7.47, 0.0], -1.5, 1.5, 61),
            FitModel::DoubleLorentzian => (vec![-48.0, 10.0, 6.0, -28.0, 12.0, 7.0, 0.0], -70.0, -10.0, 61),
            FitModel::Hinge => (vec![2.0, 0.0, 5.0, 0.0], 0.0, 4.0, 41),
            FitModel::Line => (vec![1.0, 0.5], 0.0, 4.0, 20),
            FitModel::T2Line => (vec![0.05, 1.0 / (2.0 * 8.5)], 0.5, 5.0, 10),
        }
    }

    /// Signal scale that sets the noise level at a given SNR.
    fn signal_scale(self, p: &[f64], y: &[f64]) -> f64 {
        match self {
            FitModel::DampedCosine => p[0].abs(),
            FitModel::Lorentzian => p[2].abs(),
            FitModel::DoubleLorentzian => p[2].abs().max(p[5].abs()),
            _ => {
                let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                hi - lo
            }
        }
    }
}

#[derive(Serialize)]
struct ParamEntry {
    name: &'static str,
    value: f64,
    std_error: Option<f64>,
}

#[derive(Serialize)]
struct FitReport {
    model: &'static str,
    input: String,
    n: usize,
    params: Vec<ParamEntry>,
    rss: f64,
    converged: bool,
    iterations: usize,
    degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    t2_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

/// Two numeric columns; a non-numeric first row is taken as a header.
pub fn read_xy(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if rec.len() < 2 {
            return Err(CliError::Validation(format!("{}: row {} has fewer than two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::Validation(format!("{}: row {} is not numeric", path.display(), i + 1)));
            }
        }
    }
    Ok((x, y))
}

pub fn fit_data(model: FitModel, x: &[f64], y: &[f64]) -> Result<FitResult, CliError> {
    Ok(match model {
        FitModel::DampedCosine => fit_damped_oscillation(x, y)?,
        FitModel::Lorentzian => fit_lorentzian(x, y)?,
        FitModel::DoubleLorentzian => fit_double_lorentzian(x, y)?,
        FitModel::Hinge => fit_piecewise_linear(x, y)?,
        FitModel::Line | FitModel::T2Line => fit_line(x, y)?,
    })
}

pub fn fit_cmd(ctx: &Context, model: FitModel, input: &Path) -> Result<Artifacts, CliError> {
    let (x, y) = read_xy(input)?;
    let fit = fit_data(model, &x, &y)?;
    let (t2_us, epsilon) = if model == FitModel::T2Line {
        let (t2, eps) = t2_and_epsilon(&fit)?;
        (Some(t2), Some(eps))
    } else {
        (None, None)
    };
    let params = fit
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| ParamEntry { name: n, value: fit.params[i], std_error: fit.std_errors.as_ref().map(|e| e[i]) })
        .collect();
    let report = FitReport {
        model: model.slug(),
        input: input.display().to_string(),
        n: x.len(),
        params,
        rss: fit.rss,
        converged: fit.converged,
        iterations: fit.iterations,
        degenerate: fit.degenerate,
        t2_us,
        epsilon,
    };
    let mut out = Artifacts::new();
    out.json(format!("fit_{}.json", model.slug()), "fit", ctx.config, report)?;
    Ok(out)
}

#[derive(Serialize)]
struct SynthReport {
    model: &'static str,
    seed: u64,
    snr: Option<f64>,
    sigma: f64,
    truth: Vec<ParamEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<Table>,
}

pub struct SynthArgs {
    pub model: FitModel,
    pub n: Option<usize>,
    pub snr: Option<f64>,
    pub params: Option<String>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
}

pub fn synth_cmd(ctx: &Context, args: &SynthArgs) -> Result<Artifacts, CliError> {
    let model = args.model;
    let (mut truth, mut lo, mut hi, mut n) = model.synth_defaults();
    if let Some(text) = &args.params {
        truth = parse_list("params", text)?;
        if truth.len() != model.names().len() {
            return Err(CliError::Validation(format!(
                "{} expects {} parameters ({})",
                model.slug(),
                model.names().len(),
                model.names().join(", ")
            )));
        }
    }
    if let Some(v) = args.x_min {
        lo = finite("x-min", v)?;
    }
    if let Some(v) = args.x_max {
        hi = finite("x-max", v)?;
    }
    if !(hi > lo) {
        return Err(CliError::Validation("x-max must exceed x-min".into()));
    }
    if let Some(v) = args.n {
        n = v;
    }
    if n < 2 {
        return Err(CliError::Validation("n must be at least 2".into()));
    }
    let x: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let clean: Vec<f64> = x.iter().map(|&v| model.eval(&truth, v)).collect();
    let sigma = match args.snr {
        Some(s) => model.signal_scale(&truth, &clean) / positive("snr", s)?,
        None => 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let y: Vec<f64> = if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).map_err(|e| CliError::Validation(e.to_string()))?;
        clean.iter().map(|v| v + noise.sample(&mut rng)).collect()
    } else {
        clean
    };
    let mut table = Table::new(&["x", "y"]);
    for (a, b) in x.iter().zip(&y) {
        table.push(vec![*a, *b]);
    }
    let report = SynthReport {
        model: model.slug(),
        seed: ctx.config.seed,
        snr: args.snr,
        sigma,
        truth: model
            .names()
            .iter()
            .zip(&truth)
            .map(|(name, v)| ParamEntry { name, value: *v, std_error: None })
            .collect(),
        data: (ctx.format == Format::Json).then(|| table.clone()),
    };
    let mut out = Artifacts::new();
    if ctx.format == Format::Csv {
        out.csv(format!("synth_{}.csv", model.slug()), &table)?;
    }
    out.json(format!("synth_{}.json", model.slug()), "synth", ctx.config, report)?;
    Ok(out)
}
