//! End-to-end tests of the `fermineg` binary: exit codes, output formats,
//! determinism, and agreement with the closed-form anchors.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fermineg"))
}

fn write_config(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Strip the timestamp metadata line before determinism comparisons.
fn stable_lines(stdout: &[u8]) -> String {
    String::from_utf8_lossy(stdout)
        .lines()
        .filter(|l| !l.starts_with("# generated"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn negativity_of_the_two_mode_gibbs_state() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "neg.json",
        r#"{
            "state": {"type": "gibbs", "model": {"type": "tight_binding", "n": 2, "t": 1.0}, "beta": 1.0},
            "partition": {"modes_a": [0]}
        }"#,
    );
    let out = run_ok(&["negativity", "--config", config.to_str().unwrap()]);
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = payload["value"].as_f64().unwrap();
    let expect = (2.0 * 1.0f64.cosh() / (1.0 + 1.0f64.cosh())).ln();
    assert!((value - expect).abs() < 1e-10, "value {value} vs {expect}");
    assert!((value - 0.193548).abs() < 1e-5);
    assert!(payload["roots"].is_array());
    assert!(payload["infinite_count"].is_number());
    assert!(payload["bounds"]["lower"].is_number());

    // The twisted route must fail on this state (Γ_A = 0) with exit code 3.
    let out = bin()
        .args([
            "negativity",
            "--config",
            config.to_str().unwrap(),
            "--method",
            "twisted",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "numerical");

    // The oracle route agrees.
    let out = run_ok(&[
        "negativity",
        "--config",
        config.to_str().unwrap(),
        "--method",
        "oracle",
    ]);
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((payload["value"].as_f64().unwrap() - expect).abs() < 1e-9);
}

#[test]
fn zero_state_has_zero_negativity() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "zero.json",
        r#"{"state": {"type": "zero", "n_modes": 3}, "partition": {"cut": 1}}"#,
    );
    let out = run_ok(&["negativity", "--config", config.to_str().unwrap()]);
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn malformed_and_unknown_key_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write_config(&dir, "bad.json", "{ not json");
    let out = bin()
        .args(["negativity", "--config", bad_json.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "config");

    let unknown_key = write_config(
        &dir,
        "unknown.json",
        r#"{"state": {"type": "zero", "n_modes": 3}, "partition": {"cut": 1}, "bogus": 1}"#,
    );
    let out = bin()
        .args(["negativity", "--config", unknown_key.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    let out = bin()
        .args(["negativity", "--config", missing.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "sweep.json",
        r#"{
            "model": {"type": "tight_binding", "n": 4, "t": 1.0},
            "betas": {"values": []}
        }"#,
    );
    let out = bin()
        .args(["sweep-temperature", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_check_matches_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "oracle.json",
        r#"{"n_modes": 3, "samples": 50, "seed": 11, "nu_max": 0.9}"#,
    );
    let args = ["oracle-check", "--config", config.to_str().unwrap()];
    let out1 = run_ok(&args);
    let out2 = run_ok(&args);
    assert_eq!(stable_lines(&out1.stdout), stable_lines(&out2.stdout));
    let text = String::from_utf8_lossy(&out1.stdout).to_string();
    assert!(
        text.starts_with("# fermineg"),
        "metadata row missing: {text}"
    );
    assert!(text.contains("sample,n_a,e_pencil,e_oracle,abs_diff"));
    let max_line = text.lines().last().unwrap();
    let max_diff: f64 = max_line.rsplit(',').next().unwrap().parse().unwrap();
    assert!(max_diff <= 1e-7, "max pencil-oracle difference {max_diff}");

    // Over the oracle cap: config error.
    let capped = write_config(&dir, "cap.json", r#"{"n_modes": 8, "samples": 1}"#);
    let out = bin()
        .args(["oracle-check", "--config", capped.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worker_count_does_not_change_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "temp.json",
        r#"{
            "model": {"type": "tight_binding", "n": 8, "t": 1.0},
            "betas": {"start": -3.0, "stop": 0.0, "count": 7, "log10": true}
        }"#,
    );
    let one = run_ok(&[
        "sweep-temperature",
        "--config",
        config.to_str().unwrap(),
        "--workers",
        "1",
    ]);
    let four = run_ok(&[
        "sweep-temperature",
        "--config",
        config.to_str().unwrap(),
        "--workers",
        "4",
    ]);
    let lines1 = stable_lines(&one.stdout);
    let lines4 = stable_lines(&four.stdout);
    // the workers field in the metadata differs by construction
    let strip_meta = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip_meta(&lines1), strip_meta(&lines4));
    assert!(lines1.contains("beta,lower,exact,upper,applicable"));
}

#[test]
fn evolve_reproduces_the_loss_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    // Bell state as an explicit matrix: m[0][3] = -1, m[1][2] = 1.
    let config = write_config(
        &dir,
        "evolve.json",
        r#"{
            "state": {"type": "matrix", "n_modes": 2,
                      "m": [0.0, 0.0, 0.0, -1.0,
                            0.0, 0.0, 1.0, 0.0,
                            0.0, -1.0, 0.0, 0.0,
                            1.0, 0.0, 0.0, 0.0]},
            "generator": {"loss_rate": 1.0},
            "times": {"start": 0.0, "stop": 2.0, "count": 21},
            "partition": {"cut": 1}
        }"#,
    );
    let out = run_ok(&[
        "evolve",
        "--config",
        config.to_str().unwrap(),
        "--workers",
        "3",
    ]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let mut checked = 0;
    for line in text.lines().skip(3) {
        let cols: Vec<&str> = line.split(',').collect();
        let t: f64 = cols[0].parse().unwrap();
        let e: f64 = cols[1].parse().unwrap();
        let d = (-t).exp();
        let r = 1.0 - d;
        let expect = 0.5 * (2.0 * d * d + r * r + 2.0 * d * (d * d + r * r).sqrt()).ln();
        assert!((e - expect).abs() < 1e-8, "t = {t}: {e} vs {expect}");
        checked += 1;
    }
    assert_eq!(checked, 21);
}

#[test]
fn rate_command_emits_the_cut_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "rate.json",
        r#"{
            "state": {"type": "random", "n_modes": 6, "seed": 5, "nu_max": 0.9},
            "generator": {"hamiltonian": {"type": "tight_binding", "n": 6, "t": 1.0},
                          "loss_rate": 0.5},
            "evolve_time": 0.1
        }"#,
    );
    let out = run_ok(&["rate", "--config", config.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(data_rows.len(), 5, "cuts 1..=5: {text}");
    for row in data_rows {
        let cols: Vec<&str> = row.split(',').collect();
        let total: f64 = cols[1].parse().unwrap();
        let lo: f64 = cols[2].parse().unwrap();
        let inter: f64 = cols[3].parse().unwrap();
        let increase: f64 = cols[4].parse().unwrap();
        let magnitude: f64 = cols[5].parse().unwrap();
        assert!((total - lo - inter).abs() < 1e-12);
        assert!(total <= increase + 1e-9);
        assert!(total.abs() <= magnitude + 1e-9);
    }
}

#[test]
fn sweep_dynamic_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "dyn.json",
        r#"{
            "sizes": [4, 6],
            "alpha": 2.1,
            "t": 1.0,
            "loss_rate": 0.5,
            "init": "cdw",
            "samples": 1,
            "seed": 7
        }"#,
    );
    let out = run_ok(&[
        "sweep-dynamic",
        "--config",
        config.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(data_rows.len(), 2);
    assert!(data_rows[0].starts_with("4,"));
    assert!(data_rows[1].starts_with("6,"));
}

#[test]
fn sweep_area_law_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "area.json",
        r#"{"sizes": [8, 12], "alpha": 1.5, "t": 1.0, "beta": 0.05}"#,
    );
    let out_path = dir.path().join("area.csv");
    run_ok(&[
        "sweep-area-law",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("n,exact,gamma_ab_frobenius_sq,clustering_c,frobenius_certificate"));
    // alpha at the divergence threshold is rejected with exit 3 (numerical)
    let bad = write_config(
        &dir,
        "area_bad.json",
        r#"{"sizes": [8], "alpha": 0.8, "t": 1.0, "beta": 0.05}"#,
    );
    let out = bin()
        .args(["sweep-area-law", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bounds_command_brackets_the_exact_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "bounds.json",
        r#"{
            "model": {"type": "kitaev", "n": 8, "t": 1.5},
            "betas": {"values": [0.01, 0.1, 1.0]},
            "partition": {"cut": 4}
        }"#,
    );
    let out = run_ok(&["bounds", "--config", config.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let lower: f64 = cols[1].parse().unwrap();
        let exact: f64 = cols[2].parse().unwrap();
        assert!(lower <= exact + 1e-10);
        if cols[4] == "true" {
            let upper: f64 = cols[3].parse().unwrap();
            assert!(exact <= upper + 1e-10);
        }
    }
}
