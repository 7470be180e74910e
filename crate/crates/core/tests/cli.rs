use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamma-quantile"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn quantile_prints_json() {
    let o = run(&["quantile", "--x", "1", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-13);
    assert_eq!(v["method"], "linear");

    let o = run(&["quantile", "--x", "0.01", "--p", "0.5", "--log-domain"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["method"], "logDomain");
    assert!(v["value"].as_f64().unwrap() < -69.0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["quantile", "--x", "1", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["quantile", "--x", "-1", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["expand-zero", "--x", "0.1", "--p", "0.5", "--order", "3"]).status.code(), Some(2));
    assert_eq!(run(&["quantile", "--x", "0.8", "--p", "0.5", "--log-domain"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--order", "1"]).status.code(), Some(2));
}

#[test]
fn coeffs_lists_exact_polynomials() {
    let o = run(&["coeffs", "--order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("a_1 = 1/3 + 1/6*L^2"));
    assert!(text.contains("tau_2 = 8/405 - 7/810*L^2 - 1/270*L^4"));
    let o = run(&["coeffs", "--order", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tau"][0]["n"], -2);
    assert_eq!(v["a"][0]["k"], 1);
}

#[test]
fn expand_zero_reports_log_and_coefficients() {
    let o = run(&["expand-zero", "--x", "0.005", "--p", "0.5", "--order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["log_m"].as_f64().unwrap() < -138.0);
    assert!(v["m"].is_number());
    assert!(v["coefficients"]["s1_error"].as_f64().unwrap() < 1e-12);
    let o = run(&["expand-zero", "--x", "0.0005", "--p", "0.5", "--order", "0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["m"].is_null());
}

#[test]
fn expand_infinity_compares_with_oracle() {
    let o = run(&["expand-infinity", "--x", "100", "--p", "0.3", "--order", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["abs_err"].as_f64().unwrap() < 1e-6);
}

#[test]
fn sweep_writes_csv() {
    let o = run(&["sweep", "infinity", "--x", "25,100", "--p", "0.5", "--orders", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("x,p,L,oracle_m,m_o1,m_o2,abs_err_o1,abs_err_o2,note\n"));
    assert_eq!(text.lines().count(), 3);

    let o = run(&["sweep", "zero", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn verify_passes_and_fails_on_corrupted_fixtures() {
    let o = run(&["verify", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 16);

    let text = include_str!("../fixtures/fixtures.toml").replace("8/405 - 7/810*L^2", "8/405 - 1/810*L^2");
    let path = scratch("corrupted_fixtures.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["verify", "--fixtures", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL c01_tau_table"));
}

#[test]
fn verify_reads_config_file_and_flags_win() {
    let path = scratch("verify.toml");
    std::fs::write(&path, "order = 3\nformat = \"csv\"\n").unwrap();
    let o = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("name,criterion,status,observed,expected,tolerance\n"));
    assert!(text.contains("3 exact divisions"));
    let o = run(&["verify", "--config", path.to_str().unwrap(), "--order", "4", "--format", "text"]);
    assert!(stdout(&o).contains("4 exact divisions"));
}
