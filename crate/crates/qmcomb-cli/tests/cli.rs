//! End-to-end tests of the `qmcomb` binary: flag grammar, exit codes,
//! output formats, and byte determinism of the data files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn qmcomb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmcomb"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_block_circuit(dir: &Path, name: &str, k: f64, g: f64) -> PathBuf {
    let path = dir.join(name);
    fs::write(
        &path,
        format!(
            r#"{{ "elements": [ {{ "type": "block", "center": 0.0, "delta": 1.0, "k": {k}, "g": {g} }} ] }}"#,
        ),
    )
    .unwrap();
    path
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_writes_deterministic_response_csv() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);

    let args = [
        "analyze",
        "--circuit",
        "block.json",
        "--band",
        "-1:1",
        "--out",
        "run.csv",
    ];
    let first = qmcomb(dir.path(), &args);
    assert_eq!(exit_code(&first), 0, "stderr: {}", stderr(&first));
    let first_bytes = fs::read(dir.path().join("run.csv")).unwrap();

    let second = qmcomb(dir.path(), &args);
    assert_eq!(exit_code(&second), 0);
    let second_bytes = fs::read(dir.path().join("run.csv")).unwrap();
    assert_eq!(first_bytes, second_bytes, "reruns must be byte-identical");

    let text = String::from_utf8(first_bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "nu,re_S,im_S,phase_unwrapped,T,T_rel"
    );
    // Default single-element grid: 4001 rows.
    assert_eq!(text.lines().count(), 4002);
    for line in lines {
        assert_eq!(line.split(',').count(), 6, "bad row: {line}");
    }

    // The spread over the working band matches the library's value for
    // this operating point.
    let report = stdout(&first);
    assert!(
        report.contains("delay spread over [-1, 1]: 3.342838e-3"),
        "unexpected spread report: {report}"
    );

    // The manifest is written alongside and records the run.
    let manifest = read_json(&dir.path().join("run.csv.manifest.json"));
    assert_eq!(manifest["command"], "analyze");
    assert_eq!(manifest["outputs"][0], "run.csv");
    assert_eq!(manifest["parameters"]["grid"], "-4:4:4001");
}

#[test]
fn analyze_without_waveguide_coupling_leaves_t_rel_empty() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "inert.json", 0.0, 0.5);

    let out = qmcomb(
        dir.path(),
        &[
            "analyze",
            "--circuit",
            "inert.json",
            "--band",
            "-1:1",
            "--out",
            "inert.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("undefined (T(0) = 0)"));

    let text = fs::read_to_string(dir.path().join("inert.csv")).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(','), "T_rel should be empty: {line}");
        // A block decoupled from the waveguide passes the field through
        // unchanged.
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "1.00000000000e0");
        assert_eq!(fields[2], "0.00000000000e0");
    }
}

#[test]
fn analyze_rejects_missing_circuit_file() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(
        dir.path(),
        &["analyze", "--circuit", "missing.json", "--out", "x.csv"],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("missing.json"));
}

#[test]
fn analyze_rejects_malformed_grid() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);
    let out = qmcomb(
        dir.path(),
        &[
            "analyze",
            "--circuit",
            "block.json",
            "--grid",
            "banana",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn analyze_rejects_asymmetric_grid() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);
    let out = qmcomb(
        dir.path(),
        &[
            "analyze",
            "--circuit",
            "block.json",
            "--grid",
            "-1:2:101",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("symmetric"));
}

#[test]
fn analyze_reports_aliased_sampling_as_numeric_error() {
    let dir = TempDir::new().unwrap();
    // A near-dark resonance puts a grid node right on a pi phase jump that
    // five samples cannot resolve.
    write_block_circuit(dir.path(), "alias.json", 0.001, 0.0);
    let out = qmcomb(
        dir.path(),
        &[
            "analyze",
            "--circuit",
            "alias.json",
            "--grid",
            "-2:2:5",
            "--out",
            "alias.csv",
        ],
    );
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("too coarse"));
    assert!(
        !dir.path().join("alias.csv.manifest.json").exists(),
        "failed runs must not claim completion"
    );
}

#[test]
fn optimize_partial_lands_in_expected_range() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(
        dir.path(),
        &["optimize", "--mode", "partial", "--out", "partial.json"],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let result = read_json(&dir.path().join("partial.json"));
    let k = result["k"].as_f64().unwrap();
    assert!((3.1..=3.3).contains(&k), "k = {k}");
    assert_eq!(result["g"], 0.0);
    assert_eq!(result["converged"], true);
    assert!(dir.path().join("partial.json.manifest.json").exists());
}

#[test]
fn optimize_budget_exhaustion_still_writes_best_point() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(
        dir.path(),
        &[
            "optimize",
            "--mode",
            "partial",
            "--budget",
            "10",
            "--out",
            "tiny.json",
        ],
    );
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr(&out));
    let result = read_json(&dir.path().join("tiny.json"));
    assert_eq!(result["converged"], false);
    assert_eq!(result["n_evaluations"], 10);
}

#[test]
fn optimize_rejects_bad_mode_and_bad_search_fragment() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(
        dir.path(),
        &["optimize", "--mode", "both", "--out", "x.json"],
    );
    assert_eq!(exit_code(&out), 2);

    let out = qmcomb(
        dir.path(),
        &[
            "optimize",
            "--mode",
            "partial",
            "--search",
            "{\"starts\": \"many\"}",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("search fragment"));
}

#[test]
fn glue_writes_shift_and_composite_circuit_that_reanalyzes() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(
        dir.path(),
        &[
            "glue", "--k", "3.47", "--g", "0.29", "--out", "glue.json",
        ],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let glue = read_json(&dir.path().join("glue.json"));
    let shift = glue["delta_shift"].as_f64().unwrap();
    assert!(
        (shift - 2.183012370534093).abs() < 5e-3,
        "delta shift = {shift}"
    );
    let spread = glue["spread_in_band"].as_f64().unwrap();
    assert!(
        (spread - 0.03856417332610662).abs() < 1e-3,
        "composite spread = {spread}"
    );

    // The companion circuit file feeds straight back into analyze.
    let out = qmcomb(
        dir.path(),
        &[
            "analyze",
            "--circuit",
            "glue.circuit.json",
            "--band",
            "-3:3",
            "--out",
            "composite.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("delay spread over [-3, 3]"));
}

#[test]
fn glue_comb_baseline_reports_designed_coupling() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(dir.path(), &["glue", "--comb", "4", "--out", "comb4.json"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let design = read_json(&dir.path().join("comb4.json"));
    let k = design["k"].as_f64().unwrap();
    assert!((k - 4.260191623704774).abs() < 2e-3, "comb k = {k}");
    assert_eq!(
        design["detunings"],
        serde_json::json!([-3.0, -1.0, 1.0, 3.0])
    );
    assert!(dir.path().join("comb4.circuit.json").exists());
}

#[test]
fn glue_requires_exactly_one_source() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(dir.path(), &["glue", "--out", "x.json"]);
    assert_eq!(exit_code(&out), 2);

    // --k without --g is rejected by the flag grammar.
    let out = qmcomb(dir.path(), &["glue", "--k", "3.0", "--out", "x.json"]);
    assert_eq!(exit_code(&out), 2);

    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);
    let out = qmcomb(
        dir.path(),
        &[
            "glue",
            "--circuit",
            "block.json",
            "--k",
            "3.0",
            "--g",
            "0.2",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn simulate_reports_unit_efficiency_and_writes_waveforms() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);
    let out = qmcomb(
        dir.path(),
        &[
            "simulate",
            "--circuit",
            "block.json",
            "--pulse",
            "sigma=2,center=12",
            "--out",
            "sim",
        ],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let metrics = read_json(&dir.path().join("sim.metrics.json"));
    let efficiency = metrics["efficiency"].as_f64().unwrap();
    assert!((efficiency - 1.0).abs() < 1e-3, "efficiency = {efficiency}");
    let fidelity = metrics["fidelity"].as_f64().unwrap();
    assert!(fidelity > 0.999, "fidelity = {fidelity}");

    for name in ["sim.ode.csv", "sim.tf.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,re_a,im_a");
        assert!(text.lines().count() > 100);
    }
    assert!(dir.path().join("sim.manifest.json").exists());
}

#[test]
fn simulate_rejects_nonpositive_step() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);
    let out = qmcomb(
        dir.path(),
        &[
            "simulate",
            "--circuit",
            "block.json",
            "--dt",
            "0",
            "--out",
            "sim",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn thread_cap_env_is_validated() {
    let dir = TempDir::new().unwrap();
    write_block_circuit(dir.path(), "block.json", 3.47, 0.29);
    let out = Command::new(env!("CARGO_BIN_EXE_qmcomb"))
        .current_dir(dir.path())
        .env("QMCOMB_THREADS", "zero")
        .args(["analyze", "--circuit", "block.json", "--out", "x.csv"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("QMCOMB_THREADS"));

    let out = Command::new(env!("CARGO_BIN_EXE_qmcomb"))
        .current_dir(dir.path())
        .env("QMCOMB_THREADS", "4")
        .args(["analyze", "--circuit", "block.json", "--out", "x.csv"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert!(stderr(&out).contains("serially"));
}

#[test]
fn reproduce_figures_emits_complete_dataset() {
    let dir = TempDir::new().unwrap();
    let out = qmcomb(
        dir.path(),
        &["reproduce-figures", "--out-dir", "figs"],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let figs = dir.path().join("figs");
    for name in [
        "optimize_partial.json",
        "optimize_full.json",
        "block_partial.csv",
        "block_full.csv",
        "block_partial.circuit.json",
        "block_full.circuit.json",
        "glue.json",
        "composite.circuit.json",
        "composite.csv",
        "comb4.circuit.json",
        "comb4.csv",
        "summary.json",
        "manifest.json",
    ] {
        assert!(figs.join(name).exists(), "missing {name}");
    }

    let summary = read_json(&figs.join("summary.json"));
    assert_eq!(summary["reference_full_block"]["k"], 3.47);
    assert_eq!(summary["glued_flatter_than_comb"], true);
    let ratio = summary["partial_to_full_spread_ratio"].as_f64().unwrap();
    assert!(
        (ratio - 1.6187316218178485).abs() < 1e-2,
        "spread ratio = {ratio}"
    );

    // The manifest lists every emitted file and is written last.
    let manifest = read_json(&figs.join("manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 12);
}
