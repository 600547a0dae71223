use std::fs;
use std::process::{Command, Output};

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn simulate")
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let out = simulate(&["fig9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn bad_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    assert_eq!(simulate(&["golden-rule-table", "--set", "no_such_key=1", "--out", out_dir]).status.code(), Some(2));
    assert_eq!(simulate(&["golden-rule-table", "--set", "nu0_cm=-5", "--out", out_dir]).status.code(), Some(2));
    assert_eq!(simulate(&["golden-rule-table", "--bogus-flag"]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = simulate(&["rate-sweep", "--mode", "additive", "--workers", "2", "--svg", "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["rate-sweep.csv", "rate-sweep.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.join("rate-sweep.csv")).unwrap();
    assert!(csv.starts_with("# experiment = rate-sweep\n"));
    assert!(csv.contains("# alpha_cm = 806.5\n") && csv.contains("# mode = additive\n"));
    assert!(csv.contains("\nalpha_over_eps,rate_additive_over_gamma0,M_rate_additive_over_gamma0\n"));
}

#[test]
fn overrides_reach_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(&config, "t_em_k = 6000.0\n").unwrap();
    let out = simulate(&[
        "golden-rule-table",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "t_r_k=77",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("golden-rule-table.csv")).unwrap();
    assert!(csv.contains("# t_em_k = 6000\n"), "{csv}");
    assert!(csv.contains("# t_r_k = 77\n"));
}

#[test]
fn injected_faults_fail_validation() {
    let sign = simulate(&["validate", "--skip-ibm", "--trials", "20", "--fault-frequency-sign"]);
    assert_eq!(sign.status.code(), Some(4));
    let table = String::from_utf8_lossy(&sign.stdout);
    assert!(table.lines().any(|l| l.starts_with("detailed balance (nonadditive") && l.contains("FAIL")), "{table}");

    let trunc = simulate(&["validate", "--skip-ibm", "--trials", "20", "--fault-fock-dim", "3"]);
    assert_eq!(trunc.status.code(), Some(4));
    let table = String::from_utf8_lossy(&trunc.stdout);
    assert!(table.lines().any(|l| l.starts_with("truncation convergence") && l.contains("FAIL")), "{table}");
    assert!(!table.lines().any(|l| l.starts_with("detailed balance") && l.contains("FAIL")));
}
