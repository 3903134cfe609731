//! The `acspin` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn acspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acspin"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("acspin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_trace() {
    let params = scratch("params.json");
    let out = acspin(&[
        "generate",
        "--j",
        "2",
        "--t",
        "2",
        "--analytic",
        "--out",
        path(&params),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = acspin(&["multipole-trace", "--params", path(&params)]);
    assert!(trace.status.success());
    let text = String::from_utf8(trace.stdout).unwrap();
    assert!(text.contains("# schema: multipole_trace/1"));
    assert!(text.contains("step,pulse,L,M,power"));
}

#[test]
fn unconverged_generate_exits_nonzero() {
    let out = acspin(&[
        "generate",
        "--j",
        "2",
        "--t",
        "3",
        "--nc",
        "1",
        "--max-starts",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NOT converged"));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], false);
}

#[test]
fn bad_arguments_fail() {
    assert!(!acspin(&["generate", "--j", "0.3", "--t", "2"])
        .status
        .success());
    assert!(
        !acspin(&["noise-grid", "--protocol", "ghz", "--strategies", "bogus"])
            .status
            .success()
    );
    assert!(!acspin(&[
        "control-error-grid",
        "--protocol",
        "ghz",
        "--error-type",
        "bp_type3"
    ])
    .status
    .success());
    assert!(
        !acspin(&["multipole-trace", "--params", "/nonexistent.json"])
            .status
            .success()
    );
}

#[test]
fn config_file_round_trip() {
    let printed = acspin(&[
        "control-error-grid",
        "--protocol",
        "ghz",
        "--error-type",
        "dd",
        "--h-points",
        "2",
        "--eps-points",
        "3",
        "--instances",
        "1",
        "--print-config",
    ]);
    assert!(printed.status.success());
    let cfg = scratch("control.json");
    std::fs::write(&cfg, &printed.stdout).unwrap();
    let a = acspin(&[
        "control-error-grid",
        "--protocol",
        "ghz",
        "--error-type",
        "dd",
        "--config",
        path(&cfg),
    ]);
    let b = acspin(&[
        "control-error-grid",
        "--protocol",
        "ghz",
        "--error-type",
        "dd",
        "--h-points",
        "2",
        "--eps-points",
        "3",
        "--instances",
        "1",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reruns_are_byte_identical_for_any_worker_count() {
    let args = [
        "noise-grid",
        "--protocol",
        "analytic",
        "--points",
        "2",
        "--instances",
        "2",
        "--seed",
        "5",
    ];
    let serial = Command::new(env!("CARGO_BIN_EXE_acspin"))
        .args(args)
        .env("ACSTATE_WORKERS", "1")
        .output()
        .unwrap();
    let parallel = Command::new(env!("CARGO_BIN_EXE_acspin"))
        .args(args)
        .env("ACSTATE_WORKERS", "4")
        .output()
        .unwrap();
    assert!(serial.status.success() && parallel.status.success());
    assert_eq!(serial.stdout, parallel.stdout);
    assert_eq!(acspin(&args).stdout, serial.stdout);
}

#[test]
fn missing_sequence_file_is_reported() {
    let out = acspin(&[
        "noise-grid",
        "--protocol",
        "ghz",
        "--points",
        "2",
        "--instances",
        "1",
        "--full-sequence",
        "/nonexistent/tedd.json",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn powerlaw_writes_a_file() {
    let out = scratch("powerlaw.csv");
    let r = acspin(&[
        "powerlaw",
        "--j-min",
        "20",
        "--j-max",
        "30",
        "--points",
        "2",
        "--out",
        path(&out),
    ]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# eta2_fit: slope"));
    assert!(String::from_utf8_lossy(&r.stderr).contains("eta2: slope"));
}
