// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pentamaser"))
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn csv_rows(path: PathBuf) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    ((a - b) / b).abs() <= rel
}

#[test]
fn levels_at_x_band_field_and_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let at307 = dir.path().join("x");
    ok(&at307, &["levels"]);
    let (header, rows) = csv_rows(at307.join("transitions.csv"));
    assert_eq!(header, "site,lower,upper,frequency_MHz,matrix_element_sq,population_difference");
    assert!(rows.iter().any(|r| r[1] == 0.0 && r[2] == 1.0 && (9350.0..=9420.0).contains(&r[3])));
    assert!(at307.join("levels.csv").exists());

    let zero = dir.path().join("z");
    ok(&zero, &["levels", "--b0", "0"]);
    let (_, rows) = csv_rows(zero.join("transitions.csv"));
    assert!(rows.iter().any(|r| (r[3] - 1448.92).abs() < 0.01));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let out = dir.path().join("out");
    for text in ["[spin\n", "[spin]\nd_mhz = -5.0\n", "[medium]\nmystery = 1\n"] {
        fs::write(&cfg, text).unwrap();
        let o = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).arg("metrics").output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists());
    }
    let o = bin()
        .arg("--config")
        .arg(dir.path().join("missing.toml"))
        .arg("--out")
        .arg(&out)
        .arg("levels")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn config_file_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[resonator]\nt_bath_k = 50.0\n").unwrap();
    let out = dir.path().join("m");
    let o = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).arg("metrics").output().unwrap();
    assert!(o.status.success());
    let v = json(out.join("metrics.json"));
    assert!(close(v["result"]["noise_temperature_k"].as_f64().unwrap(), 30.0, 0.04));
    assert_eq!(v["config"]["resonator"]["t_bath_k"], 50.0);
    assert_eq!(v["config"]["spin"]["d_mhz"], 1395.57);
}

#[test]
fn rotation_pattern_writes_one_csv_per_angle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rot");
    ok(&out, &["--preset", "paper", "rotation-pattern"]);
    let manifest = json(out.join("rotation_pattern.json"));
    let entries = manifest["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 19);
    let csvs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "csv").count();
    assert_eq!(csvs, 19);
    for e in entries {
        assert!(e["lines"].as_array().unwrap().len() <= 4);
        let (header, rows) = csv_rows(out.join(e["file"].as_str().unwrap()));
        assert_eq!(header, "field_mT,amplitude");
        assert_eq!(rows.len(), 2001);
    }
}

#[test]
fn empty_theta_list_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rot");
    let o = run(&out, &["rotation-pattern", "--thetas", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = run(&out, &["rotation-pattern", "--thetas", "0,abc"]);
    assert_eq!(o.status.code(), Some(2));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    for args in [
        &["rotation-pattern", "--thetas", "0,45,90"][..],
        &["--seed", "9", "synth", "damped-cosine", "--snr", "20"][..],
        &["amplify", "--t-span", "20"][..],
    ] {
        ok(&out, args);
        let first = snapshot(&out);
        fs::remove_dir_all(&out).unwrap();
        ok(&out, args);
        assert_eq!(first, snapshot(&out), "{args:?}");
        fs::remove_dir_all(&out).unwrap();
    }
}

#[test]
fn seeds_change_synthetic_noise() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&a, &["--seed", "1", "synth", "lorentzian", "--snr", "20"]);
    ok(&b, &["--seed", "2", "synth", "lorentzian", "--snr", "20"]);
    assert_ne!(fs::read(a.join("synth_lorentzian.csv")).unwrap(), fs::read(b.join("synth_lorentzian.csv")).unwrap());
}

#[test]
fn metrics_at_paper_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    ok(&out, &["metrics"]);
    let raw = fs::read_to_string(out.join("metrics.json")).unwrap();
    let at = |k: &str| raw.find(&format!("\"{k}\"")).unwrap();
    assert!(at("tool") < at("version") && at("version") < at("command"));
    assert!(at("command") < at("config") && at("config") < at("result"));
    let v = json(out.join("metrics.json"));
    assert_eq!(v["tool"], "pentamaser");
    assert_eq!(v["command"], "metrics");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    let r = &v["result"];
    assert!(close(r["qm"].as_f64().unwrap(), 1.3e4, 0.02));
    assert_eq!(r["regime"], "amplifier");
    assert!((r["gain_db"].as_f64().unwrap() - 14.8).abs() < 0.2);
    assert!(close(r["bandwidth_mhz"].as_f64().unwrap(), 0.13, 0.05));
    assert!((r["noise_temperature_k"].as_f64().unwrap() - 172.0).abs() < 3.0);
}

#[test]
fn amplify_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("amp");
    ok(&out, &["amplify", "--p-in-dbm", "-46"]);
    let (header, rows) = csv_rows(out.join("amplify_trajectory.csv"));
    assert_eq!(header, "t_us,re_a,im_a,re_sminus,im_sminus,sz,photons,p_out_W");
    assert_eq!(rows.len(), 2000);
    let s = &json(out.join("amplify_summary.json"))["result"];
    let plateau = s["plateau_gain_db"].as_f64().unwrap();
    assert!(plateau > 0.0 && plateau <= s["peak_gain_db"].as_f64().unwrap());
    assert!(s["duration_us"].as_f64().unwrap() > 0.0);
}

#[test]
fn oscillate_flags_bursts_against_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let below = dir.path().join("below");
    ok(&below, &["oscillate", "--n0", "2e10"]);
    assert_eq!(json(below.join("oscillate_summary.json"))["result"]["burst"], false);
    let above = dir.path().join("above");
    ok(&above, &["oscillate"]);
    assert_eq!(json(above.join("oscillate_summary.json"))["result"]["burst"], true);
}

#[test]
fn pump_profile_integrates_to_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pump");
    ok(&out, &["pump-profile"]);
    let (header, rows) = csv_rows(out.join("pump_profile.csv"));
    assert_eq!(header, "depth_mm,triplet_density_per_m3");
    assert_eq!(rows.len(), 200);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] * (1.0 + 1e-12)));
    let r = &json(out.join("pump_summary.json"))["result"];
    assert!(close(r["total_triplets"].as_f64().unwrap(), 2.1e14, 1e-9));
    assert!(close(r["effective_inverted_spins"].as_f64().unwrap(), 2.0e12, 0.02));
}

#[test]
fn synth_then_fit_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    ok(&out, &["synth", "lorentzian"]);
    let fit_out = dir.path().join("f");
    ok(&fit_out, &["fit", "lorentzian", "--input", out.join("synth_lorentzian.csv").to_str().unwrap()]);
    let r = &json(fit_out.join("fit_lorentzian.json"))["result"];
    let fwhm = r["params"].as_array().unwrap().iter().find(|p| p["name"] == "fwhm").unwrap();
    assert!(close(fwhm["value"].as_f64().unwrap(), 0.34, 1e-8));

    ok(&out, &["synth", "t2-line"]);
    ok(&fit_out, &["fit", "t2-line", "--input", out.join("synth_t2_line.csv").to_str().unwrap()]);
    let r = &json(fit_out.join("fit_t2_line.json"))["result"];
    assert!(close(r["t2_us"].as_f64().unwrap(), 8.5, 1e-9));
}

#[test]
fn fit_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let o = run(&out, &["fit", "line", "--input", dir.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let text = dir.path().join("text.csv");
    fs::write(&text, "x,y\n1,2\n3,oops\n").unwrap();
    assert_eq!(run(&out, &["fit", "line", "--input", text.to_str().unwrap()]).status.code(), Some(2));

    // a straight line has no breakpoint: valid input, failed estimator
    let straight = dir.path().join("straight.csv");
    let body: String = (0..20).map(|i| format!("{i},{}\n", 1.0 + 2.0 * i as f64)).collect();
    fs::write(&straight, body).unwrap();
    assert_eq!(run(&out, &["fit", "hinge", "--input", straight.to_str().unwrap()]).status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn json_format_writes_no_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("j");
    ok(&out, &["--format", "json", "pump-profile"]);
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["pump_summary.json"]);
    let r = &json(out.join("pump_summary.json"))["result"];
    assert_eq!(r["profile"]["columns"][0], "depth_mm");
}

#[test]
fn threshold_scan_reports_linear_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    ok(&out, &["threshold-scan", "--ql", "5e4,2e5,6.5e5"]);
    let r = &json(out.join("threshold_scan.json"))["result"];
    assert_eq!(r["points"].as_array().unwrap().len(), 3);
    assert!(r["slope"].as_f64().unwrap() > 0.0);
    let (header, rows) = csv_rows(out.join("threshold_scan.csv"));
    assert_eq!(header, "q_loaded,n0,peak_power_W");
    assert_eq!(rows.len(), 3 * 41);
}
