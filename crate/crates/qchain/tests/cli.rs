use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qchain(out: &Path, args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qchain"));
    cmd.arg("--out").arg(out).args(args);
    match seed_env {
        Some(s) => cmd.env("QCHAIN_SEED", s),
        None => cmd.env_remove("QCHAIN_SEED"),
    };
    cmd.output().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["spectra", "--n", "4"][..],
        &["spectra", "--family", "nope", "--n", "4"],
        &["frobnicate"],
        &["spectra", "--family", "generic", "--n", "20"],
        &["spectra", "--family", "generic", "--n", "4", "--samples", "0"],
        &["jw", "--model", "random-jw", "--n", "4", "--eps", "x"],
        &["replay", "--manifest", "/nonexistent/manifest.json"],
    ] {
        let o = qchain(tmp.path(), args, None);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_and_version_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    for flag in ["--help", "--version"] {
        let o = qchain(tmp.path(), &[flag], None);
        assert_eq!(o.status.code(), Some(0));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn manifest_records_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qchain(tmp.path(), &["--threads", "2", "spectra", "--family", "local", "--n", "5", "--samples", "3", "--seed", "8"], None);
    assert!(o.status.success());
    let m = manifest(tmp.path());
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["command"], "spectra");
    assert_eq!(m["seed"], 8);
    assert_eq!(m["passed"], true);
    assert_eq!(m["args"][0], "spectra");
    assert!(m["args"].as_array().unwrap().iter().all(|a| a != "--threads"));
    for f in m["outputs"].as_array().unwrap() {
        assert!(tmp.path().join(f.as_str().unwrap()).exists());
    }
    let tsv = std::fs::read_to_string(tmp.path().join("spectra.tsv")).unwrap();
    assert!(tsv.starts_with("# lo hi bins captured_fraction\n# -3 3 240 "));
    assert_eq!(tsv.lines().count(), 242);
}

#[test]
fn seed_falls_back_to_environment() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["spectra", "--family", "generic", "--n", "4", "--samples", "2"];
    assert!(qchain(a.path(), &args, Some("77")).status.success());
    assert_eq!(manifest(a.path())["seed"], 77);
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "77"]);
    assert!(qchain(b.path(), &explicit, Some("5")).status.success());
    assert_eq!(manifest(b.path())["seed"], 77);
    let read = |d: &Path| std::fs::read(d.join("spectra.tsv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert!(qchain(c.path(), &args, None).status.success());
    assert_eq!(manifest(c.path())["seed"], 0);
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn tbasis_reports_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(qchain(tmp.path(), &["tbasis", "--n", "6", "--l", "1"], None).status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("tbasis.json")).unwrap()).unwrap();
    assert!((v["average_purity"].as_f64().unwrap() - (0.5 + 1.0 / 12.0)).abs() < 1e-9);
    assert_eq!(v["passed"], true);
}
