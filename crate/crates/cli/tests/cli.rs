//! End-to-end runs of the `lumpcyl` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lumpcyl"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_passes_and_strict_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(
        dir.path(),
        &["verify", "--only", "f_lemma", "--only", "asymptotics"],
    );
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let out = stdout(&ok);
    assert!(out.starts_with("name,expected,got,tol,status\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",PASS")));

    let strict = run(
        dir.path(),
        &["verify", "--only", "asymptotics", "--tol", "1e-15"],
    );
    assert_eq!(code(&strict), 3);
    assert!(stdout(&strict).contains(",FAIL"));
}

#[test]
fn xi0_table_shape_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "xi0",
            "--a-min",
            "0.01",
            "--a-max",
            "100",
            "--per-decade",
            "100",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("xi0.csv,401"));
    let (header, rows) = records(&dir.path().join("xi0.csv"));
    assert_eq!(header, ["a", "I", "R", "Ueff", "radius", "height"]);
    assert_eq!(rows.len(), 401);
    let num = |r: &Vec<String>, i: usize| r[i].parse::<f64>().unwrap();
    let one = rows
        .iter()
        .find(|r| (num(r, 0) - 1.0).abs() < 1e-12)
        .expect("a = 1 sampled");
    assert!((num(one, 1) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
    let heights: Vec<f64> = rows.iter().map(|r| num(r, 5)).collect();
    assert!(heights.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "field",
        "--family",
        "gamma2",
        "--alphas",
        "-0.5,0,0.5",
        "--nx",
        "41",
        "--ny",
        "16",
    ];
    assert_eq!(code(&run(a.path(), &args)), 0);
    assert_eq!(code(&run(b.path(), &args)), 0);
    for name in [
        "field_000.csv",
        "field_001.csv",
        "field_002.csv",
        "field_manifest.csv",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn field_manifest_lists_frames() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "field",
            "--family",
            "gamma3",
            "--alphas",
            "-3,-1,0,1,3",
            "--nx",
            "81",
            "--ny",
            "32",
        ],
    );
    assert_eq!(code(&o), 0);
    let (header, rows) = records(&dir.path().join("field_manifest.csv"));
    assert_eq!(
        header,
        ["frame", "file", "family", "param", "alpha_re", "alpha_im", "energy"]
    );
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(dir.path().join(&r[1]).exists());
        let e: f64 = r[6].parse().unwrap();
        assert!((e / (8.0 * std::f64::consts::PI) - 1.0).abs() < 0.01, "{e}");
    }
    let (h, frame) = records(&dir.path().join("field_000.csv"));
    assert_eq!(h, ["x", "y", "E"]);
    assert_eq!(frame.len(), 81 * 32);
}

#[test]
fn geodesic_csv_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "geodesic", "--a", "2", "--da", "-0.1", "--dtheta", "0.05", "--t-end", "5",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("outcome,completed"));
    let mut r = csv::Reader::from_path(dir.path().join("geodesic.csv")).unwrap();
    let energies: Vec<f64> = r
        .records()
        .map(|rec| rec.unwrap()[5].parse().unwrap())
        .collect();
    assert!(energies.len() > 2);
    assert!(energies
        .iter()
        .all(|e| (e / energies[0] - 1.0).abs() < 1e-8));
}

#[test]
fn metric_reports_hermitian_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["metric", "--n", "2", "--p", "inf", "--zeta", "0.5,0.5,1"],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("hermiticity_defect,"));
    let (header, rows) = records(&dir.path().join("metric.csv"));
    assert_eq!(header, ["i", "j", "re", "im"]);
    assert_eq!(rows.len(), 9);
}

#[test]
fn length_is_finite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["length", "--family", "gamma0", "--t-max", "10"],
    );
    assert_eq!(code(&o), 0);
    let len: f64 = stdout(&o).trim().parse().unwrap();
    assert!(len.is_finite() && len > 0.0);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# coarse output\nprecision = 4\n").unwrap();
    let args = ["xi0", "--a-min", "1", "--a-max", "10", "--per-decade", "4"];
    let o = run(
        dir.path(),
        &[&["--config", cfg.to_str().unwrap()], &args[..]].concat(),
    );
    assert_eq!(code(&o), 0);
    let (_, rows) = records(&dir.path().join("xi0.csv"));
    assert_eq!(rows[0][1], "19.74");

    let o = run(
        dir.path(),
        &[
            &["--config", cfg.to_str().unwrap(), "--precision", "6"],
            &args[..],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0);
    let (_, rows) = records(&dir.path().join("xi0.csv"));
    assert_eq!(rows[0][1], "19.7392");

    std::fs::write(&cfg, "colour = red\n").unwrap();
    let o = run(
        dir.path(),
        &[&["--config", cfg.to_str().unwrap()], &args[..]].concat(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["xi0", "--a-min", "5", "--a-max", "1"][..],
        &["nonsense"],
        &["metric", "--n", "2", "--p", "0", "--zeta", "not-a-number"],
        &["verify", "--only", "nope"],
        &["--precision", "40", "xi0"],
    ] {
        let o = run(dir.path(), args);
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}
