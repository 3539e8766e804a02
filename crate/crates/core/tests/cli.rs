use std::fs;
use std::process::{Command, Output};

fn qcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcap"))
        .args(args)
        .output()
        .expect("spawn qcap")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let idx = header.iter().position(|h| *h == name).expect("column");
    lines
        .map(|l| l.split(',').nth(idx).expect("cell").to_string())
        .collect()
}

#[test]
fn bound_pure_loss_is_capacity() {
    let out = qcap(&["bound", "--channel", "pure-loss", "--eta", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(column(&text, "value"), ["1.00000000000"]);
    assert_eq!(column(&text, "kind"), ["capacity"]);
}

#[test]
fn strong_converse_distillable_example() {
    let out = qcap(&[
        "strong-converse",
        "--channel",
        "pure-loss",
        "--eta",
        "0.5",
        "--n",
        "100",
        "--eps",
        "0.01",
        "--variant",
        "distillable",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = column(&stdout(&out), "value")[0].parse().unwrap();
    assert!((v - 1.02643).abs() < 5e-6, "{v}");
}

#[test]
fn thresholds_file_has_six_protocols_and_61_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("thresholds.csv");
    let out = qcap(&["qkd-thresholds", "--db", "0:30:61", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 7);
    assert_eq!(header[0], "loss_db");
    assert_eq!(text.lines().count(), 62);
}

#[test]
fn thresholds_are_deterministic() {
    let a = qcap(&["qkd-thresholds", "--db", "0:30:31", "--diagnostics"]);
    let b = qcap(&["qkd-thresholds", "--db", "0:30:31", "--diagnostics"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_has_meta_and_data() {
    let out = qcap(&["--format", "json", "bound", "--channel", "identity"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["meta"]["command"], "bound");
    assert_eq!(json["data"][0]["value"], "INF");
}

#[test]
fn infinite_bound_prints_sentinel_in_csv() {
    let out = qcap(&["bound", "--channel", "additive-noise", "--xi", "0"]);
    assert_eq!(column(&stdout(&out), "value"), ["INF"]);
}

#[test]
fn sweep_has_one_row_per_grid_point() {
    let out = qcap(&[
        "sweep",
        "--channel",
        "pure-loss,thermal-loss",
        "--param",
        "eta",
        "--grid",
        "0.1:0.9:9",
        "--nbar",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "eta,pure-loss,thermal-loss");
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn sim_error_matrix_shape() {
    let out = qcap(&[
        "sim-error",
        "--mu-grid",
        "1:1000:4",
        "--mu-in-grid",
        "0.5:5000:3",
        "--matrix",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 4);
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# defaults\nchannel=pure-loss\neta=0.3\n").unwrap();
    let from_file = qcap(&["--config", cfg.to_str().unwrap(), "bound"]);
    let overridden = qcap(&["--config", cfg.to_str().unwrap(), "bound", "--eta", "0.5"]);
    assert_eq!(column(&stdout(&from_file), "eta"), ["0.300000000000"]);
    assert_eq!(column(&stdout(&overridden), "value"), ["1.00000000000"]);
}

#[test]
fn exit_codes() {
    assert_eq!(qcap(&["bound", "--channel", "warp-drive"]).status.code(), Some(2));
    assert_eq!(
        qcap(&["bound", "--channel", "pure-loss", "--eta", "0.5", "--nbar", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qcap(&["frobnicate"]).status.code(), Some(2));
    let domain = qcap(&["bound", "--channel", "pure-loss", "--eta", "1.5"]);
    assert_eq!(domain.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("eta"));
    assert_eq!(
        qcap(&["capacity", "--channel", "depolarizing", "--p", "0.1"])
            .status
            .code(),
        Some(3)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.csv");
    assert_eq!(
        qcap(&[
            "bound",
            "--channel",
            "pure-loss",
            "--eta",
            "0.5",
            "--out",
            bad.to_str().unwrap()
        ])
        .status
        .code(),
        Some(4)
    );
}

#[test]
fn selftest_single_suite() {
    let out = qcap(&["selftest", "--suite", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().skip(1).all(|l| l.starts_with("1,")));
}
