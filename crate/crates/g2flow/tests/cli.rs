//! Drives the g2flow binary end to end: exit-code contract, CSV format and
//! determinism, manifest contents, and the JSON reports.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_g2flow"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn flow_bryant_writes_full_precision_csv_and_manifest() {
    let dir = tempdir("flow-bryant");
    let status = bin()
        .args(["flow", "--example", "bryant", "--dt", "1e-2", "--t-end", "0.2", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&dir.join("trajectory.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,coeff_e123,tau_norm_sq,vol_coeff");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0"), "{first}");
    // every row carries 17 significant digits
    for field in csv.lines().nth(2).unwrap().split(',') {
        assert!(field.contains('e') && field.len() >= 19, "field '{field}'");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "flow");
    assert_eq!(manifest["frame"], "fernandez7");
    assert_eq!(manifest["steps"], 20);
    assert!(manifest["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn flow_output_is_bit_identical_across_runs() {
    let (d1, d2) = (tempdir("det-1"), tempdir("det-2"));
    for d in [&d1, &d2] {
        let status = bin()
            .args(["flow", "--example", "as-torsionfree", "--grid", "1:2:101", "--dt", "1e-5"])
            .args(["--t-end", "1e-4", "--out"])
            .arg(d)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read(&d1.join("trajectory.csv")), read(&d2.join("trajectory.csv")));
    assert_eq!(read(&d1.join("manifest.json")), read(&d2.join("manifest.json")));
}

#[test]
fn check_and_reduce_emit_passing_reports() {
    let out = bin()
        .args(["check", "--example", "as-soliton:k=1", "--what", "soliton"])
        .args(["--grid", "-1:1:65"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["extras"]["lambda"], -4.5);

    let out = bin()
        .args(["reduce", "--example", "bryant", "--t", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["h"], 1.0);
    assert_eq!(report["gamma16"]["e5"], 0.5);
    assert_eq!(report["xi"]["e6"], 1.0);
}

#[test]
fn exit_code_contract() {
    // usage errors exit 2
    let status = bin().args(["flow", "--example", "nonsense"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["check", "--example", "bryant", "--what", "bogus"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["flow", "--example", "flat", "--dt", "-1.0", "--t-end", "1"])
        .env("G2FLOW_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // numeric failures exit 1: a CFL violation on the warped flow
    let dir = tempdir("cfl");
    let status = bin()
        .args(["flow", "--example", "as-soliton:k=2", "--grid", "-1:1:201"])
        .args(["--dt", "1e-2", "--t-end", "0.1", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // an invalid thread cap is a usage error
    let status = bin()
        .args(["flow", "--example", "flat", "--dt", "1e-2", "--t-end", "0.1", "--out"])
        .arg(tempdir("threads"))
        .env("G2FLOW_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("g2flow-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
