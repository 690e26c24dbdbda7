use std::path::Path;
use std::process::{Command, Output};

use mubcorr::states::{random_product_state, save_state};
use mubcorr::MubSet;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mubcorr")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(out: &str, name: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{name}=")))
        .unwrap_or_else(|| panic!("{name} missing from {out}"))
        .parse()
        .unwrap()
}

#[test]
fn measure_werner_singlet() {
    let o = run(&["measure", "--family", "werner", "--d", "2", "--alpha", "1", "--measures", "C,Ef"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((value(&out, "C") - 1.0).abs() < 1e-3);
    assert!((value(&out, "Ef") - 1.0).abs() < 1e-3);
}

#[test]
fn measure_product_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("product.json");
    save_state(&random_product_state(2, 2, 9).unwrap(), &path).unwrap();
    let o = run(&["measure", "--state", path.to_str().unwrap(), "--measures", "C"]);
    assert!(o.status.success());
    assert!(value(&stdout(&o), "C").abs() < 1e-6);
}

#[test]
fn measure_json_output() {
    let o = run(&["--json", "measure", "--family", "bell-diagonal", "--r", "1,0,0", "--measures", "C,Q2,D,Ef"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["C"].as_f64().unwrap() - 0.399_123_963_307_143_84).abs() < 1e-3);
    for m in ["Q2", "D", "Ef"] {
        assert!(v[m].as_f64().unwrap() < 1e-3, "{m}");
    }
}

#[test]
fn domain_errors_exit_1() {
    let o = run(&["measure", "--family", "isotropic", "--d", "2", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
    assert_eq!(run(&["measure"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["measure", "--state", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn sweep_rho2_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rho2.csv");
    let o = run(&[
        "sweep", "--family", "bell-diagonal-rho2", "--measures", "C,Q2,D,Ef", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "param,C,Q2,D,Ef");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.3993).abs() < 1e-3);
    assert!(first[2..].iter().all(|v| v.abs() < 1e-3));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn sweep_rho1_c_equals_q2_at_half() {
    let o = run(&[
        "sweep", "--family", "bell-diagonal-rho1", "--measures", "C,Q2", "--mode", "numeric", "--from", "0.5", "--to",
        "1", "--steps", "2",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 0.5);
    assert!((row[1] - row[2]).abs() < 2e-3, "{row:?}");
}

fn werner_both(seed: &str, out: &Path) -> Output {
    run(&[
        "--seed", seed, "--restarts", "6", "sweep", "--family", "werner", "--d", "2", "--steps", "9", "--measures",
        "C,D,Ef", "--mode", "both", "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn sweep_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(werner_both("7", &a).status.success());
    assert!(werner_both("7", &b).status.success());
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("param,C_cf,C_num,D_cf,D_num,Ef_cf,Ef_num\n"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() <= 1e-3, "{line}");
    }
}

#[test]
fn bad_sweep_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.csv");
    let o = run(&["sweep", "--family", "isotropic", "--from", "-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn verify_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "--seed", "42", "--restarts", "8", "verify", "--samples", "20", "--da", "2", "--db", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["samples"], 20);
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
    assert_eq!(report["products_detected"], 2);
    assert_eq!(report["witnesses_found"], 18);
}

#[test]
fn verify_zero_samples_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(run(&["verify", "--samples", "0", "--out", out.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn mubs_commands() {
    let o = run(&["mubs", "--d", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("bases=4") && out.contains("validation PASS"));

    let o = run(&["mubs", "--d", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prime"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    assert!(run(&["mubs", "--d", "2", "--out", path.to_str().unwrap()]).status.success());
    let set = MubSet::load(&path).unwrap();
    assert_eq!(set.len(), 3);
    assert!(set.max_defect() < 1e-10);
}
