//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to see the lines in order.

use std::time::{Duration, Instant};

use gamma_quantile::harness::{self, checks, Check, Context, Fixtures, VerifyConfig};

fn context() -> Context {
    Context::new(VerifyConfig::default(), Fixtures::builtin())
}

fn run(ctx: &Context, name: &str) -> (Check, Duration) {
    let f = checks::find(name).expect("registered check");
    let start = Instant::now();
    let check = f(ctx);
    let elapsed = start.elapsed();
    println!("{}", check.line());
    (check, elapsed)
}

fn assert_pass(check: &Check) {
    assert!(check.passed(), "{}", check.line());
}

#[test]
fn criterion_01_exact_tau_table() {
    let ctx = context();
    let (check, _) = run(&ctx, "c01_tau_table");
    println!("  order-7 table built in {:?}", ctx.table_build_time());
    assert_pass(&check);
    assert!(ctx.table_build_time() < Duration::from_secs(10));
}

#[test]
fn criterion_02_exact_a_coefficients() {
    assert_pass(&run(&context(), "c02_a_coefficients").0);
}

#[test]
fn criterion_03_e_divisibility() {
    assert_pass(&run(&context(), "c03_e_divisibility").0);
}

#[test]
fn criterion_04_q_polynomials() {
    assert_pass(&run(&context(), "c04_q_polynomials").0);
}

#[test]
fn criterion_05_median_crosscheck() {
    let ctx = context();
    // exclude the one-off table build from the timed part
    ctx.table().expect("table builds");
    let (check, elapsed) = run(&ctx, "c05_median_crosscheck");
    assert_pass(&check);
    assert!(elapsed < Duration::from_secs(1), "{elapsed:?}");
}

#[test]
fn criterion_06_pn_family() {
    assert_pass(&run(&context(), "c06_pn_family").0);
}

#[test]
fn criterion_07_small_x_limits() {
    let ctx = context();
    ctx.coeffs().expect("s_q converge");
    let (check, elapsed) = run(&ctx, "c07_small_x_limits");
    assert_pass(&check);
    assert!(elapsed < Duration::from_secs(5), "{elapsed:?}");
}

#[test]
fn criterion_08_power_limit() {
    assert_pass(&run(&context(), "c08_power_limit").0);
}

#[test]
fn criterion_09_derivative_asymptotics() {
    assert_pass(&run(&context(), "c09_derivative_asymptotics").0);
}

#[test]
fn criterion_10_j_expansion() {
    assert_pass(&run(&context(), "c10_j_expansion").0);
}

#[test]
fn criterion_11_oracle_consistency() {
    assert_pass(&run(&context(), "c11_oracle_consistency").0);
}

#[test]
fn diagnostics_confirm_documented_misprints() {
    let ctx = context();
    for name in [
        "d01_tau2_printed_form",
        "d02_j2_printed_prefactor",
        "d03_z_printed_form",
        "d04_phi_integral_identity",
        "d05_regression_constants",
    ] {
        assert_pass(&run(&ctx, name).0);
    }
}

#[test]
fn every_criterion_has_exactly_one_check() {
    let report = harness::run_verify(&VerifyConfig::default()).unwrap();
    for n in 1..=11u8 {
        assert_eq!(report.checks.iter().filter(|c| c.criterion == Some(n)).count(), 1, "criterion {n}");
    }
    assert!(report.all_passed(), "{}", report.to_text());
}

#[test]
fn corrupted_tau2_fixture_fails_the_named_check() {
    let text = include_str!("../fixtures/fixtures.toml").replace("8/405 - 7/810*L^2", "8/405 - 1/810*L^2");
    let ctx = Context::new(VerifyConfig::default(), Fixtures::from_toml(&text).unwrap());
    let (check, _) = run(&ctx, "c01_tau_table");
    assert!(!check.passed());
    assert!(check.observed.contains("tau_2"), "{}", check.observed);
}

#[test]
fn order_three_restricts_the_tau_comparison() {
    let cfg = VerifyConfig { order: 3, ..VerifyConfig::default() };
    let ctx = Context::new(cfg, Fixtures::builtin());
    let (check, _) = run(&ctx, "c01_tau_table");
    assert_pass(&check);
    assert!(check.observed.contains("[-2, -1, 0, 1, 2, 3]"), "{}", check.observed);
    assert_pass(&run(&ctx, "c03_e_divisibility").0);
}

#[test]
fn json_report_is_deterministic_apart_from_the_timestamp() {
    let cfg = VerifyConfig::default();
    let mut a = harness::run_verify(&cfg).unwrap();
    let mut b = harness::run_verify(&cfg).unwrap();
    a.generated_at.clear();
    b.generated_at.clear();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
