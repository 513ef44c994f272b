use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hilbert(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbert")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
    write("simplex3.json", r#"{"dim": 3, "kind": "simplex"}"#);
    write("disk.json", r#"{"dim": 2, "kind": "ball", "parameters": {"radius": 1}}"#);
    write("square.json", r#"{"dim": 2, "kind": "cube", "parameters": {"half_width": 1}}"#);
    write("triangle.txt", "# triangle\n0 0\n1 0\n0 1\n");
    dir
}

#[test]
fn flags_of_tetrahedron() {
    let dir = fixtures();
    let o = hilbert(dir.path(), &["flags", "--body", "simplex3.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "24");
}

#[test]
fn distance_in_disk() {
    let dir = fixtures();
    let o = hilbert(dir.path(), &["distance", "--body", "disk.json", "--p", "0", "0", "--q", "0.5", "0"]);
    assert!(o.status.success());
    let h: f64 = stdout(&o).trim().parse().unwrap();
    assert!((h - 0.5 * 3f64.ln()).abs() < 1e-12);
    assert!(stdout(&o).starts_with("0.5493061"));
}

#[test]
fn verify_ratio_on_square() {
    let dir = fixtures();
    let o = hilbert(dir.path(), &["verify-ratio", "--body", "square.json", "--R", "9"]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ratio = report["estimate"].as_f64().unwrap();
    assert!((ratio - 4.0 / 3.0).abs() < 0.01, "ratio {ratio}");
    assert_eq!(report["details"]["flags"].as_u64(), Some(8));
}

#[test]
fn exit_codes() {
    let dir = fixtures();
    assert_eq!(hilbert(dir.path(), &["nonsense"]).status.code(), Some(1));
    assert_eq!(hilbert(dir.path(), &["flags", "--body", "missing.json"]).status.code(), Some(1));
    assert_eq!(hilbert(dir.path(), &["flags", "--body", "disk.json"]).status.code(), Some(1));
    let outside = hilbert(dir.path(), &["distance", "--body", "disk.json", "--p", "0", "0", "--q", "2", "0"]);
    assert_eq!(outside.status.code(), Some(1));
    let decreasing = hilbert(dir.path(), &["ball-volume", "--body", "disk.json", "--R", "2", "1"]);
    assert_eq!(decreasing.status.code(), Some(1));
    // the window spans the polynomial and exponential regimes, which one model cannot fit
    let bad_fit = hilbert(
        dir.path(),
        &[
            "entropy",
            "--body",
            "disk.json",
            "--directions",
            "128",
            "--window",
            "0.001",
            "10",
            "--R",
            "0.001",
            "0.003",
            "0.01",
            "0.03",
            "0.1",
            "0.3",
            "1",
            "3",
            "6",
            "10",
        ],
    );
    assert_eq!(bad_fit.status.code(), Some(2), "{}", String::from_utf8_lossy(&bad_fit.stderr));
}

#[test]
fn config_file_with_flag_override() {
    let dir = fixtures();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"body": "disk.json", "R": [1, 2, 3], "kind": "busemann", "directions": 256}"#,
    )
    .unwrap();
    let from_file = stdout(&hilbert(dir.path(), &["ball-volume", "--config", "run.json"]));
    assert_eq!(from_file.lines().count(), 4);
    assert!(from_file.starts_with("R,volume,stderr,kind,body\n"));
    let overridden = stdout(&hilbert(dir.path(), &["ball-volume", "--config", "run.json", "--R", "2"]));
    assert_eq!(overridden.lines().count(), 2);
    let volume = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    let (a, b) = (volume(overridden.lines().nth(1).unwrap()), volume(from_file.lines().nth(2).unwrap()));
    assert!(overridden.lines().nth(1).unwrap().starts_with("2,"));
    assert!((a - b).abs() < 1e-9 * b);
}

#[test]
fn outputs_are_deterministic() {
    let dir = fixtures();
    let args = ["ball-volume", "--body", "triangle.txt", "--R", "1", "2", "--samples", "2000", "--seed", "7"];
    let a = hilbert(dir.path(), &args);
    let b = hilbert(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let d1 = hilbert(dir.path(), &["decompose", "--body", "square.json", "--picker", "random", "--seed", "5"]);
    let d2 = hilbert(dir.path(), &["decompose", "--body", "square.json", "--picker", "random", "--seed", "5"]);
    assert_eq!(d1.stdout, d2.stdout);
    assert_eq!(stdout(&d1).lines().count(), 9);
}

#[test]
fn approximation_round_trips_through_files() {
    let dir = fixtures();
    let o = hilbert(dir.path(), &["approximate", "--body", "disk.json", "--eps", "0.01", "--out", "approx.json"]);
    assert!(o.status.success());
    let written = std::fs::read_to_string(dir.path().join("approx.json")).unwrap();
    let body = hilbert_core::io::parse_body(&written).unwrap();
    let again = hilbert_core::io::BodySpec::from_body(&body).unwrap().to_json();
    let reloaded = hilbert_core::io::parse_body(&again).unwrap();
    let (a, b) = (body.as_polytope().unwrap(), reloaded.as_polytope().unwrap());
    assert_eq!(a.vertices().len(), b.vertices().len());
    for (x, y) in a.vertices().iter().zip(b.vertices()) {
        assert!((x - y).norm() < 1e-12);
    }
    let flags = hilbert(dir.path(), &["flags", "--body", "approx.json"]);
    assert_eq!(stdout(&flags).trim().parse::<u64>().unwrap(), 2 * a.vertices().len() as u64);
}
