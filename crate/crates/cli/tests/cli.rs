use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn potential(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../potentials").join(name)
}

fn qcsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcsolve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_path(cmd: &str, file: &str, extra: &[&str]) -> Output {
    let p = potential(file);
    let mut args = vec![cmd, p.to_str().unwrap()];
    args.extend_from_slice(extra);
    qcsolve(&args)
}

fn csv_rows(text: &[u8]) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(text);
    r.records().map(|r| r.unwrap()).collect()
}

#[test]
fn harmonic_spectrum_json() {
    let out = run_path("spectrum", "harmonic.json", &["--levels", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json_stdout(&out);
    let levels = doc["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 5);
    for (i, l) in levels.iter().enumerate() {
        let e = l["E"].as_f64().unwrap();
        assert!((e - (i as f64 + 0.5)).abs() < 1e-9, "n = {i}: {e}");
        assert!(l["residual"].as_f64().unwrap() < 1e-9);
    }
    assert!(doc["truncation"].is_null());
    assert_eq!(doc["manifest"]["command"], "spectrum");
    assert_eq!(doc["manifest"]["potential"]["type"], "harmonic");
}

#[test]
fn spectrum_json_round_trips_bit_for_bit() {
    let out = run_path("spectrum", "morse.json", &["--levels", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json_stdout(&out);
    let text = std::fs::read_to_string(potential("morse.json")).unwrap();
    let v = qcsolve::PotentialDescriptor::from_json(&text).unwrap().to_model().unwrap();
    let spec = qcsolve::spectrum(&v, 3, &qcsolve::SolverConfig::default()).unwrap();
    for (row, level) in doc["levels"].as_array().unwrap().iter().zip(&spec.levels) {
        assert_eq!(row["E"].as_f64().unwrap().to_bits(), level.energy.to_bits());
        assert_eq!(row["W"].as_f64().unwrap().to_bits(), level.action.to_bits());
    }
}

#[test]
fn spectrum_csv_has_seventeen_digits() {
    let out = run_path("spectrum", "harmonic.json", &["--levels", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 3);
    let e: f64 = rows[1][1].parse().unwrap();
    assert!((e - 1.5).abs() < 1e-12);
    assert_eq!(rows[1][1].split('e').next().unwrap().len(), 18);
    // manifest goes to stderr when writing to stdout
    let manifest: Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(manifest["config"]["format"], "csv");
}

#[test]
fn morse_truncates_with_exit_two() {
    let out = run_path("spectrum", "morse.json", &["--levels", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json_stdout(&out);
    assert_eq!(doc["levels"].as_array().unwrap().len(), 4);
    assert!(doc["truncation"].as_str().unwrap().contains("n = 4"));
    assert!(stderr(&out).contains("truncated"));
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "").unwrap();
    let out = qcsolve(&["spectrum", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 1 column 0"), "{}", stderr(&out));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"type\": \"harmonic\",\n \"params\": {\"omega\": }}").unwrap();
    let out = qcsolve(&["spectrum", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2 column"), "{}", stderr(&out));
}

#[test]
fn multi_turning_point_refusal_is_verbatim() {
    let text = std::fs::read_to_string(potential("double_well.json")).unwrap();
    let v = qcsolve::PotentialDescriptor::from_json(&text).unwrap().to_model().unwrap();
    let err = qcsolve::spectrum(&v, 2, &qcsolve::SolverConfig::default()).unwrap_err();
    let out = run_path("spectrum", "double_well.json", &["--levels", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out).trim(), format!("error: {err}"));
}

fn wavefunction_rows(n: &str, grid: &str) -> (Vec<csv::StringRecord>, Value) {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("psi.csv");
    let out = run_path(
        "wavefunction",
        "harmonic.json",
        &["--n", n, "--grid", grid, "--out", out_path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = csv_rows(&std::fs::read(&out_path).unwrap());
    let sidecar = dir.path().join("psi.csv.manifest.json");
    let manifest: Value = serde_json::from_slice(&std::fs::read(sidecar).unwrap()).unwrap();
    (rows, manifest)
}

#[test]
fn wavefunction_ground_state_is_normalized() {
    let (rows, manifest) = wavefunction_rows("0", "1001");
    assert_eq!(rows.len(), 1001);
    assert_eq!(manifest["command"], "wavefunction");
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    let norm: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 * w[0].1 + w[1].1 * w[1].1))
        .sum();
    assert!((norm - 1.0).abs() < 1e-3, "norm {norm}");
}

#[test]
fn wavefunction_nodes_and_regions() {
    let (rows, _) = wavefunction_rows("3", "1001");
    let header = ["x", "phi", "psi", "region", "epsilon", "delta"];
    let allowed: Vec<f64> = rows
        .iter()
        .filter(|r| &r[3] == "allowed")
        .map(|r| r[2].parse().unwrap())
        .collect();
    let nodes = allowed.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert_eq!(nodes, 3);
    let mut blocks: Vec<String> = Vec::new();
    for r in &rows {
        if blocks.last().map(String::as_str) != Some(&r[3]) {
            blocks.push(r[3].to_string());
        }
    }
    assert_eq!(blocks, ["left_forbidden", "allowed", "right_forbidden"]);
    // diagnostics are blank outside the allowed region
    for r in &rows {
        assert_eq!(r.len(), header.len());
        if &r[3] != "allowed" {
            assert!(r[4].is_empty() && r[5].is_empty());
        }
    }
}

#[test]
fn wavefunction_missing_level_fails() {
    let out = run_path("wavefunction", "morse.json", &["--n", "6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("does not exist"), "{}", stderr(&out));
}

fn audit(file: &str, levels: &str) -> Value {
    let out = run_path("audit", file, &["--levels", levels]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    json_stdout(&out)
}

#[test]
fn audit_harmonic_agrees() {
    let doc = audit("harmonic.json", "8");
    assert!(doc["max_abs_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8);
}

#[test]
fn audit_morse_agrees() {
    let doc = audit("morse.json", "4");
    assert!(doc["max_abs_deviation"].as_f64().unwrap() < 1e-5);
}

#[test]
fn audit_linear_ground_state_deviation() {
    let doc = audit("linear.json", "4");
    let rows = doc["rows"].as_array().unwrap();
    let d0 = rows[0]["relative_deviation"].as_f64().unwrap();
    assert!((0.08..0.11).contains(&d0), "{d0}");
    let d: Vec<f64> = rows
        .iter()
        .map(|r| r["relative_deviation"].as_f64().unwrap().abs())
        .collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

fn radial(file: &str, args: &[&str]) -> Value {
    let out = run_path("radial", file, args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    json_stdout(&out)
}

#[test]
fn radial_coulomb_levels() {
    let doc = radial("coulomb.json", &["--ntheta", "0", "--mz", "0", "--nrmax", "2"]);
    let e: Vec<f64> = doc["levels"].as_array().unwrap().iter().map(|l| l["E"].as_f64().unwrap()).collect();
    for (got, want) in e.iter().zip([-0.5, -0.125, -1.0 / 18.0]) {
        assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
    }
    assert_eq!(doc["angular"]["m_z"], 0);
    assert_eq!(doc["angular"]["n_theta"], 0);
    assert!((doc["angular"]["M"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn radial_oscillator_levels() {
    let doc = radial("oscillator3d.json", &["--ntheta", "0", "--mz", "0", "--nrmax", "1"]);
    let e: Vec<f64> = doc["levels"].as_array().unwrap().iter().map(|l| l["E"].as_f64().unwrap()).collect();
    assert_eq!(e.len(), 2);
    assert!((e[0] - 1.5).abs() < 1e-9 && (e[1] - 3.5).abs() < 1e-9, "{e:?}");
}

#[test]
fn radial_negative_mz_is_accepted() {
    let doc = radial("coulomb.json", &["--ntheta", "0", "--mz", "-1", "--nrmax", "0"]);
    // n = 2 shell with l = 1
    assert!((doc["levels"][0]["E"].as_f64().unwrap() + 0.125).abs() < 1e-9);
}

#[test]
fn radial_rejects_non_integer_mz() {
    let out = run_path("radial", "coulomb.json", &["--mz", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = run_path("spectrum", "harmonic.json", &["--levels", "6", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let mut doc: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        doc["manifest"]["timestamp"] = Value::Null;
        docs.push(doc);
    }
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn help_exits_zero() {
    assert_eq!(qcsolve(&["--help"]).status.code(), Some(0));
    assert_eq!(qcsolve(&["bogus"]).status.code(), Some(1));
}
