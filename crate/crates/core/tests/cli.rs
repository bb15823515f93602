//! End-to-end runs of the `bosent` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bosent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosent")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn preset(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = bosent(&[&["state"], args].concat());
    assert!(out.status.success());
    write(dir, name, std::str::from_utf8(&out.stdout).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn basis_table_dimension() {
    let v = json(&bosent(&["basis", "--n", "2", "--modes", "4", "--bipartition", "2"]));
    assert_eq!(v["D"], 10);
    assert_eq!(v["sectors"].as_array().unwrap().len(), 3);
    let csv = bosent(&["basis", "--n", "2", "--modes", "4", "--bipartition", "2", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with("index,k,sigma,sigma_prime,occupation"));
}

#[test]
fn analyze_phase_state() {
    let dir = TempDir::new().unwrap();
    for n in [1usize, 2, 3, 5] {
        let file = preset(&dir, "phase.json", &["phase", "--n", &n.to_string()]);
        let v = json(&bosent(&["analyze", s(&file)]));
        let neg = v["negativity"].as_f64().unwrap();
        assert!((neg - n as f64 / 2.0).abs() < 1e-9, "N={n}: {neg}");
        assert_eq!(v["verdict"], "entangled");
    }
}

#[test]
fn robustness_bounds_of_phase_state() {
    let dir = TempDir::new().unwrap();
    let file = preset(&dir, "phase.json", &["phase", "--n", "3", "--phases", "0.1,-2,0.4,1"]);
    let v = json(&bosent(&["robustness", s(&file), "--generalized", "--bounds"]));
    assert!((v["bounds"]["lambda_D"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((v["bounds"]["l1"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(v["status"], "bounds_only");
    assert!(v["value"]["upper"].as_f64().unwrap() <= 3.0 + 1e-8);

    let standard = json(&bosent(&["robustness", s(&file)]));
    assert_eq!(standard["value"], "inf");
    assert_eq!(standard["kind"], "standard");
}

#[test]
fn robustness_with_witness() {
    let dir = TempDir::new().unwrap();
    // Bell pair inside the k = 1 sector of (N, M, m) = (2, 4, 2).
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let file = write(&dir, "bell.json", &format!(r#"{{"N":2,"M":4,"m":2,"amplitudes":[0,0,0,{h},0,0,{h},0,0,0]}}"#));
    let v = json(&bosent(&["robustness", s(&file), "--emit-witness"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["per_block"][0]["method"], "pure_negativity");
    assert_eq!(v["per_block"][0]["k"], 1);
    assert_eq!(v["witness"]["sigma_tilde"].as_array().unwrap().len(), 10);
}

#[test]
fn transform_beamsplitter() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "fock.json", r#"{"N":2,"M":2,"m":1,"amplitudes":[0,1,0]}"#);
    let v = json(&bosent(&["transform", s(&file), "--beamsplitter"]));
    let amps: Vec<f64> = v["amplitudes"].as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // basis order |0,2⟩, |1,1⟩, |2,0⟩
    for (a, e) in amps.iter().zip([-h, 0.0, h]) {
        assert!((a - e).abs() < 1e-12, "{amps:?}");
    }
}

#[test]
fn tables_are_csv() {
    let out = bosent(&["scan", "werner", "--n", "2", "--steps", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    assert_eq!(text.lines().next().unwrap(), "p,negativity,trace_norm,status");
    assert_eq!(text.lines().count(), 5);

    let dir = TempDir::new().unwrap();
    let sep = preset(&dir, "sep.json", &["totally-mixed", "--n", "2"]);
    let ent = preset(&dir, "ent.json", &["phase", "--n", "2"]);
    let out = bosent(&["probe", "border", s(&sep), s(&ent)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().skip(1).all(|l| l.contains("entangled")));

    let out = bosent(&["sweep", s(&sep), "--samples", "5", "--seed", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad_trace = write(&dir, "bad.json", r#"{"N":1,"M":2,"m":1,"matrix":[[0.5,0],[0,0.4]]}"#);
    let out = bosent(&["analyze", s(&bad_trace)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace"));

    let not_psd = write(&dir, "psd.json", r#"{"N":1,"M":2,"m":1,"matrix":[[1.1,0],[0,-0.1]]}"#);
    let out = bosent(&["analyze", s(&not_psd)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("psd"));

    assert_eq!(bosent(&["analyze", "--bogus", "x"]).status.code(), Some(64));
    assert_eq!(bosent(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(bosent(&["--help"]).status.code(), Some(0));
    let file = write(&dir, "ok.json", r#"{"N":1,"M":2,"m":1,"matrix":[[0.5,0],[0,0.5]]}"#);
    assert_eq!(bosent(&["analyze", s(&file), "--format", "csv"]).status.code(), Some(64));
    assert_eq!(bosent(&["analyze", s(&file)]).status.code(), Some(0));
}

#[test]
fn selfcheck_passes() {
    let out = bosent(&["selfcheck"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let file = preset(&dir, "w.json", &["werner", "--n", "2", "--p", "0.3"]);
    let a = bosent(&["sweep", s(&file), "--samples", "7", "--seed", "11"]);
    let b = bosent(&["sweep", s(&file), "--samples", "7", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}
