mod common;

use std::process::{Command, Output};

use common::fixture;
use geoprec::io::read_matrix;

fn geoprec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoprec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn summary_field(csv: &str, key: &str) -> f64 {
    let line = csv.lines().find(|l| l.starts_with("# termination=")).expect("summary row");
    line.trim_start_matches("# ")
        .split(',')
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

#[test]
fn condition_of_worked_example() {
    let out = geoprec(&["condition", "--input", &path("example1.mtx"), "--kind", "euclidean"]);
    assert!(out.status.success());
    let k: f64 = stdout(&out).trim().parse().unwrap();
    assert!((k - 11.77).abs() < 0.01, "{k}");
}

#[test]
fn precondition_diagonal_reaches_optimum() {
    let out = geoprec(&["precondition", "--input", &path("diag_1_10.mtx"), "--eps", "1e-4"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("iter,value,grad_norm,duality_bound,kF,kappa\n"));
    let kf = summary_field(&csv, "final_kF");
    assert!((kf - 2.0).abs() < 1e-3, "{kf}");
    assert!(summary_field(&csv, "certificate") <= 1e-4);
}

#[test]
fn identical_runs_give_identical_output() {
    let args = [
        "precondition",
        "--input",
        &path("example1.mtx"),
        "--side",
        "both",
        "--stochastic",
        "--probes",
        "40",
        "--seed",
        "7",
        "--max-iters",
        "30",
    ];
    let (a, b) = (geoprec(&args), geoprec(&args));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_file_and_preconditioner_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let x = dir.path().join("X.mtx");
    let y = dir.path().join("Y.mtx");
    let emit = format!("{},{}", x.display(), y.display());
    let out = geoprec(&[
        "precondition",
        "--input",
        &path("example1.mtx"),
        "--side",
        "both",
        "--out",
        csv.to_str().unwrap(),
        "--emit-preconditioner",
        &emit,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("final kF"));
    let trace = std::fs::read_to_string(&csv).unwrap();
    let final_kf = summary_field(&trace, "final_kF");

    // the emitted pair reproduces the reported condition number
    let a = common::example1().to_dense();
    let xm = read_matrix(&x).unwrap().to_dense();
    let ym = read_matrix(&y).unwrap().to_dense();
    let b = xm * a * ym.try_inverse().unwrap();
    let kf = b.norm() * b.try_inverse().unwrap().norm();
    assert!((kf - final_kf).abs() <= 1e-9 * kf, "{kf} vs {final_kf}");
}

#[test]
fn baseline_writes_scaled_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let scaled = dir.path().join("s.mtx");
    let out = geoprec(&[
        "baseline",
        "--input",
        &path("example1.mtx"),
        "--method",
        "jacobi-left",
        "--out",
        scaled.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let b = read_matrix(&scaled).unwrap().to_dense();
    for i in 0..3 {
        assert!((b[(i, i)].re - 1.0).abs() < 1e-15);
    }
}

#[test]
fn polysys_actions_run() {
    for action in ["shuffle", "full", "sparse"] {
        let input = if action == "sparse" { "sparse3.json" } else { "example2.json" };
        let out = geoprec(&["polysys-precondition", "--input", &path(input), "--action", action]);
        assert!(out.status.success(), "{action}: {}", String::from_utf8_lossy(&out.stderr));
        let csv = stdout(&out);
        assert!(summary_field(&csv, "final_kF") <= summary_field(&csv, "initial_kF") + 1e-12);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(geoprec(&["--help"]).status.code(), Some(0));
    assert_eq!(geoprec(&["precondition", "--bogus"]).status.code(), Some(1));
    assert_eq!(geoprec(&["condition", "--input", "/nonexistent.mtx"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mtx");
    std::fs::write(&bad, "not a matrix market file\n").unwrap();
    assert_eq!(geoprec(&["condition", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn bench_on_directory_suite() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["example1.mtx", "diag_1_10.mtx"] {
        std::fs::copy(fixture(name), dir.path().join(name)).unwrap();
    }
    let out = geoprec(&[
        "bench",
        "--suite",
        "dir",
        "--dir",
        dir.path().to_str().unwrap(),
        "--block-size",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3, "{csv}");
}
