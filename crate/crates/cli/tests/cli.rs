use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::Digest;
use siba_core::experiments::replay;
use siba_core::{Provenance, SweepTable};

fn siba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siba")).args(args).env_remove("SIBA_THREADS").output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn mode(kind: &str, eta: f64, detuning: f64, kappa_half: f64) -> Value {
    json!({
        "profile": { "kind": kind },
        "kappa_ex": kappa_half,
        "kappa_in": kappa_half,
        "drive_flux_sq": 1.0,
        "detuning_tilde": detuning,
        "eta": eta,
    })
}

fn write_config(dir: &Path, name: &str, modes: Vec<Value>) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&json!({ "modes": modes })).unwrap()).unwrap();
    p.display().to_string()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn missing_config_names_the_path() {
    let out = siba(&["potential", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("missing.json"));
}

#[test]
fn coarse_full_step_fails_the_precheck() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k100.json", vec![mode("fundamental", 10.0, -5.0, 50.0)]);
    let traj = dir.path().join("t.csv");
    let out = siba(&["simulate", "--config", &cfg, "--mode", "full", "--dt", "1.0", "--out", traj.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("unstable time step") && err.contains("dt*kappa"), "{err}");
    assert!(!traj.exists());
}

#[test]
fn validate_passes_on_the_reference_config() {
    let out = siba(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    let stdout = text(&out.stdout);
    for id in 1..=7 {
        assert!(stdout.contains(&format!("criterion {id}: PASS")), "{stdout}");
    }
    let manifest: Value = serde_json::from_str(text(&out.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "validate");
    assert_eq!(manifest["config"]["path"], "<bundled>/reference.json");
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["bogus"][..], &["potential", "--config", "x.json", "--nope"], &[]] {
        let out = siba(args);
        assert_eq!(out.status.code(), Some(2));
        assert!(text(&out.stderr).contains("Usage"));
    }
    let out = siba(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn zero_threads_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_siba")).args(["eta-scan", "--points", "2"]).env("SIBA_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_trap_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("edge.json");
    let mut m = mode("fundamental", 1.0, 0.0, 0.5);
    m["profile"] = json!({ "kind": "fundamental", "x_lo": -1.5, "x_hi": 0.0 });
    fs::write(&p, json!({ "modes": [m] }).to_string()).unwrap();
    let out = siba(&["metrics", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("no trap"));
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", vec![mode("fundamental", -1.0, 0.0, 0.5)]);
    assert_eq!(siba(&["potential", "--config", &cfg]).status.code(), Some(2));
    let p = dir.path().join("garbage.json");
    fs::write(&p, "{ not json").unwrap();
    let out = siba(&["potential", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("garbage.json"));
}

#[test]
fn potential_columns_follow_mode_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_config(dir.path(), "one.json", vec![mode("fundamental", 10.0, -5.0, 0.5)]);
    let two = write_config(
        dir.path(),
        "two.json",
        vec![mode("fundamental", 10.0, -5.0, 0.5), mode("second_harmonic", 10.0, -5.0, 0.5)],
    );
    let out = siba(&["potential", "--config", &one, "--grid", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = text(&out.stdout);
    assert_eq!(csv.lines().next(), Some("x,f1,n1,U_tot,F"));
    assert_eq!(csv.lines().count(), 12);
    let out_path = dir.path().join("pot.csv");
    let out = siba(&["potential", "--config", &two, "--grid", "11", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().next(), Some("x,f1,f2,n1,n2,U_tot,F"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 7));
    let manifest = read_json(&dir.path().join("pot.manifest.json"));
    let bytes = fs::read(&two).unwrap();
    assert_eq!(manifest["config"]["sha256"], hex::encode(sha2::Sha256::digest(&bytes)));
}

#[test]
fn simulate_writes_a_conserving_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ref.json", vec![mode("fundamental", 10.0, -5.0, 0.5)]);
    let traj = dir.path().join("traj.csv");
    let out = siba(&["simulate", "--config", &cfg, "--ekin", "0.2", "--periods", "5", "--out", traj.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = fs::read_to_string(&traj).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,p,n_1,U,H_eff"));
    let h: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let (lo, hi) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    // Verlet energy error stays bounded at O(dt²); 0.2 of a depth below 2.75.
    assert!(hi - lo < 1e-4 * 0.55, "{lo} {hi}");
    assert!(h.len() > 1000);
    let mut entries: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    entries.sort();
    assert_eq!(entries, ["ref.json", "traj.csv", "traj.manifest.json"]);
}

#[test]
fn full_mode_matches_adiabatic_for_fast_cavity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ref.json", vec![mode("fundamental", 1.0, -0.5, 0.5)]);
    let run = |m: &str, extra: &[&str]| {
        let p = dir.path().join(format!("{m}.csv"));
        let mut args = vec!["simulate", "--config", &cfg, "--mode", m, "--periods", "2", "--dt", "1e-4", "--out", p.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = siba(&args);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        fs::read_to_string(&p).unwrap()
    };
    let a = run("adiabatic", &[]);
    let f = run("full", &["--kappa-over-omega0", "1000"]);
    let xs = |s: &str| s.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).collect::<Vec<_>>();
    let (xa, xf) = (xs(&a), xs(&f));
    assert_eq!(xa.len(), xf.len());
    let amp = xa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = xa.iter().zip(&xf).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev < 0.01 * amp, "{dev} vs {amp}");
}

#[test]
fn figure_outputs_replay_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig3.json");
    fs::write(&cfg, r#"{ "etas": [0.01, 1.0, 100.0], "ekin_fracs": [0.1] }"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = siba(&["--threads", "2", "fig3", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let meta = read_json(&out_dir.join("fig3.meta.json"));
    assert_eq!(meta["manifest"]["threads"], 2);
    assert_eq!(meta["manifest"]["subcommand"], "fig3");
    let prov: Provenance = serde_json::from_value(meta["provenance"].clone()).unwrap();
    assert_eq!(prov.settings["etas"], json!([0.01, 1.0, 100.0]));
    let csv = fs::read_to_string(out_dir.join("fig3.csv")).unwrap();
    let table = SweepTable::parse_csv("fig3", &csv, prov.clone()).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert_eq!(replay(&prov).unwrap().to_csv(), csv);
}

#[test]
fn figs3_defaults_to_the_node_side_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s3.json");
    fs::write(&cfg, r#"{ "etas": [0.01, 10.0] }"#).unwrap();
    let out = siba(&["figS3", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let meta = read_json(&dir.path().join("figS3.meta.json"));
    let x_r = meta["provenance"]["settings"]["x_r"].as_f64().unwrap();
    assert_eq!(x_r, std::f64::consts::PI / 10.0);
    assert!(dir.path().join("figS3.csv").exists());
}

#[test]
fn fig5_writes_labels_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("f5.json");
    fs::write(&cfg, r#"{ "wall_multiples": [0.0, 1.0, 10.0], "power_levels": [1.1, 10.0, 100.0] }"#).unwrap();
    let out = siba(&["fig5", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with(",regime"));
    assert_eq!(csv.lines().count(), 10);
    let summary = read_json(&dir.path().join("fig5_summary.json"));
    assert!(summary["comparison"]["ratio"].as_f64().unwrap() < 0.1);
    assert!(summary["design"]["k_numeric"].as_f64().unwrap() > 0.0);
}

#[test]
fn eta_scan_emits_long_form_csv() {
    let out = siba(&["eta-scan", "--q", "1e4,1e6", "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = text(&out.stdout);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "q,kr,eta");
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("10000.0,0.01,"));
}
