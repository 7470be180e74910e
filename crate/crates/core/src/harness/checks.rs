//! One check per acceptance criterion, plus diagnostics that pin down the
//! known misprints in the reference formulas.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use super::config::VerifyConfig;
use super::fixtures::Fixtures;
use super::report::Check;
use crate::exactalg::{rat, BigRational};
use crate::infinity::{compute_c, ExpansionError, ExpansionTable};
use crate::oracle::{self, JKind};
use crate::qpolys::gen_q;
use crate::zero::{self, SmallXCoeffs, ZeroError};

/// Shared, lazily built inputs of the checks.
pub struct Context {
    pub config: VerifyConfig,
    pub fixtures: Fixtures,
    table: OnceLock<(Result<ExpansionTable, ExpansionError>, Duration)>,
    coeffs: OnceLock<Result<SmallXCoeffs, ZeroError>>,
}

/// Time budget for building the exact tables at the default order.
pub const TABLE_BUDGET: Duration = Duration::from_secs(10);

impl Context {
    pub fn new(config: VerifyConfig, fixtures: Fixtures) -> Self {
        Self { config, fixtures, table: OnceLock::new(), coeffs: OnceLock::new() }
    }

    fn table_entry(&self) -> &(Result<ExpansionTable, ExpansionError>, Duration) {
        self.table.get_or_init(|| {
            let start = Instant::now();
            let table = ExpansionTable::build(self.config.order);
            (table, start.elapsed())
        })
    }

    pub fn table(&self) -> Result<&ExpansionTable, &ExpansionError> {
        self.table_entry().0.as_ref()
    }

    pub fn table_build_time(&self) -> Duration {
        self.table_entry().1
    }

    pub fn coeffs(&self) -> Result<&SmallXCoeffs, &ZeroError> {
        self.coeffs.get_or_init(|| zero::u_derivatives(self.config.s_tol)).as_ref()
    }
}

pub type CheckFn = fn(&Context) -> Check;

/// Every check, in report order.
pub const CHECKS: &[(&str, CheckFn)] = &[
    ("c01_tau_table", tau_table),
    ("c02_a_coefficients", a_coefficients),
    ("c03_e_divisibility", e_divisibility),
    ("c04_q_polynomials", q_polynomials),
    ("c05_median_crosscheck", median_crosscheck),
    ("c06_pn_family", pn_family),
    ("c07_small_x_limits", small_x_limits),
    ("c08_power_limit", power_limit),
    ("c09_derivative_asymptotics", derivative_asymptotics),
    ("c10_j_expansion", j_expansion),
    ("c11_oracle_consistency", oracle_consistency),
    ("d01_tau2_printed_form", tau2_printed_form),
    ("d02_j2_printed_prefactor", j2_printed_prefactor),
    ("d03_z_printed_form", z_printed_form),
    ("d04_phi_integral_identity", phi_integral_identity),
    ("d05_regression_constants", regression_constants),
];

pub fn find(name: &str) -> Option<CheckFn> {
    CHECKS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

const P_GRID: [f64; 3] = [0.25, 0.5, 0.75];

pub fn tau_table(ctx: &Context) -> Check {
    const NAME: &str = "c01_tau_table";
    let table = match ctx.table() {
        Ok(t) => t,
        Err(e) => return Check::errored(NAME, Some(1), e),
    };
    let within_budget = ctx.config.order > 7 || ctx.table_build_time() < TABLE_BUDGET;
    let mut compared = Vec::new();
    let mut mismatches = Vec::new();
    for (n, want) in ctx.fixtures.tau_polys() {
        if n > ctx.config.order as i64 {
            continue;
        }
        compared.push(n);
        let got = table.tau(n).expect("n within table order");
        if *got != want {
            mismatches.push(format!("tau_{n} = {got}"));
        }
    }
    let observed = if mismatches.is_empty() {
        format!("tau_n equal for n in {:?}", compared)
    } else {
        format!("mismatch: {}", mismatches.join("; "))
    };
    let ok = mismatches.is_empty() && within_budget && !compared.is_empty();
    let observed = if within_budget { observed } else { format!("{observed}; build exceeded {TABLE_BUDGET:?}") };
    Check::new(NAME, Some(1), ok, observed, "fixture table (tau_2 corrected, see d01)", "exact; order-7 build < 10 s")
}

pub fn a_coefficients(ctx: &Context) -> Check {
    const NAME: &str = "c02_a_coefficients";
    let table = match ctx.table() {
        Ok(t) => t,
        Err(e) => return Check::errored(NAME, Some(2), e),
    };
    let mut mismatches = Vec::new();
    let fixtures = ctx.fixtures.a_polys();
    for (k, want) in &fixtures {
        match table.a(*k) {
            Some(got) if got == want => {}
            Some(got) => mismatches.push(format!("a_{k} = {got}")),
            None => mismatches.push(format!("a_{k} missing")),
        }
    }
    let observed = if mismatches.is_empty() {
        fixtures.iter().map(|(k, p)| format!("a_{k} = {p}")).collect::<Vec<_>>().join("; ")
    } else {
        format!("mismatch: {}", mismatches.join("; "))
    };
    Check::new(NAME, Some(2), mismatches.is_empty(), observed, "a_1 = 1/3 + 1/6*L^2; a_2 = 5/36*L + 1/36*L^3", "exact")
}

pub fn e_divisibility(ctx: &Context) -> Check {
    const NAME: &str = "c03_e_divisibility";
    let order = ctx.config.order;
    match ctx.table() {
        Ok(t) => Check::new(
            NAME,
            Some(3),
            t.divisions() == order,
            format!("{} exact divisions by E, plain/Phi/G residuals all zero", t.divisions()),
            format!("{order} divisions"),
            "exact",
        ),
        Err(e) => Check::new(NAME, Some(3), false, format!("error: {e}"), format!("{order} divisions"), "exact"),
    }
}

/// `y_j = h^{(j)}(0)`.
fn y_value(j: usize) -> BigRational {
    let j = j as i64;
    rat(1, (j + 1) * (j + 2))
}

pub fn q_polynomials(ctx: &Context) -> Check {
    const NAME: &str = "c04_q_polynomials";
    let mut mismatches = Vec::new();
    let mut seen = 0;
    for n in 1..=3 {
        match ctx.fixtures.q_substituted(n, y_value) {
            Some(want) => {
                seen += 1;
                let got = gen_q(n);
                if got != want {
                    mismatches.push(format!("Q_{n}: got {} want {}", got.display_with("s"), want.display_with("s")));
                }
            }
            None => mismatches.push(format!("Q_{n} fixture missing")),
        }
    }
    let observed = if mismatches.is_empty() {
        format!("Q_1..Q_3 equal ({seen} fixtures)")
    } else {
        mismatches.join("; ")
    };
    Check::new(NAME, Some(4), mismatches.is_empty(), observed, "published Q_n with y_j = 1/((j+1)(j+2))", "exact")
}

pub fn median_crosscheck(ctx: &Context) -> Check {
    const NAME: &str = "c05_median_crosscheck";
    let table = match ctx.table() {
        Ok(t) => t,
        Err(e) => return Check::errored(NAME, Some(5), e),
    };
    let err_at = |x: f64| -> Result<f64, String> {
        let q = oracle::quantile(x, 0.5, ctx.config.oracle_tol).map_err(|e| e.to_string())?;
        let e = table.eval_expansion(x, 0.0, 2).map_err(|e| e.to_string())?;
        Ok((q.value - e).abs())
    };
    match (err_at(100.0), err_at(400.0)) {
        (Ok(e100), Ok(e400)) => {
            let ratio = e100 / e400;
            Check::new(
                NAME,
                Some(5),
                e100 < 5e-4 && ratio >= 6.0,
                format!("err(100) = {}, err(400) = {}, ratio {:.2}", sci(e100), sci(e400), ratio),
                "err(100) < 5e-4, ratio >= 6",
                "as stated",
            )
        }
        (Err(e), _) | (_, Err(e)) => Check::errored(NAME, Some(5), e),
    }
}

pub fn pn_family(_ctx: &Context) -> Check {
    const NAME: &str = "c06_pn_family";
    let mut bad = Vec::new();
    for n in 1..=12usize {
        let p = zero::p_polynomial(n);
        let ni = n as i64;
        let support_ok = p.poly.support() == (n + 1..=2 * n).collect::<Vec<_>>();
        let top = p.coeff(2 * n) == 1.into();
        let second = p.coeff(2 * n - 1) == (-ni * (ni - 1)).into();
        let third = p.coeff(2 * n - 2) == (ni * (ni - 1).pow(2) * (ni - 2) / 2).into();
        if !(support_ok && top && second && third) {
            bad.push(n);
        }
    }
    let observed = if bad.is_empty() { "n = 1..12 all hold".to_string() } else { format!("fails for n = {bad:?}") };
    Check::new(
        NAME,
        Some(6),
        bad.is_empty(),
        observed,
        "support {n+1..2n}; a_2n = 1, a_2n-1 = -n(n-1), a_2n-2 = n(n-1)^2(n-2)/2",
        "exact",
    )
}

/// Richardson table over `x, x/2, x/4` for a quantity linear-plus-quadratic
/// in `x`: level one from the two finest points, level two from all three.
fn richardson(v: [f64; 3]) -> (f64, f64) {
    let (r1, r2) = (2.0 * v[1] - v[0], 2.0 * v[2] - v[1]);
    (r2, (4.0 * r2 - r1) / 3.0)
}

pub fn small_x_limits(ctx: &Context) -> Check {
    const NAME: &str = "c07_small_x_limits";
    let coeffs = match ctx.coeffs() {
        Ok(c) => *c,
        Err(e) => return Check::errored(NAME, Some(7), e),
    };
    let run = || -> Result<Check, ZeroError> {
        let mut ok = true;
        let mut parts = Vec::new();
        let mut primes = Vec::new();
        for &p in &P_GRID {
            let u: Vec<f64> = [0.08, 0.04, 0.02]
                .iter()
                .map(|&x| zero::u_from_oracle(x, p))
                .collect::<Result<_, _>>()?;
            let u = [u[0], u[1], u[2]];
            let dev = (u[2] - coeffs.u0).abs();
            let (level1, level2) = richardson(u);
            let rich = (level1 - coeffs.u0).abs();
            let du = zero::u_prime_from_oracle(0.02, p)?;
            let du_dev = (du - coeffs.u1).abs();
            ok &= dev <= 0.02 && rich <= 1e-3 && du_dev <= 5e-3;
            primes.push(du);
            parts.push(format!(
                "p={p}: |u-u0| {} rich {} (level 2: {}) |u'-u0 s1| {}",
                sci(dev),
                sci(rich),
                sci((level2 - coeffs.u0).abs()),
                sci(du_dev)
            ));
        }
        let spread = primes.iter().cloned().fold(f64::MIN, f64::max) - primes.iter().cloned().fold(f64::MAX, f64::min);
        ok &= spread <= 1e-3;
        parts.push(format!("u' spread across p {}", sci(spread)));
        Ok(Check::new(
            NAME,
            Some(7),
            ok,
            parts.join("; "),
            format!("u0 = {:.10}, u0 s1 = {:.10}", coeffs.u0, coeffs.u1),
            "|u-u0| <= 0.02, rich <= 1e-3, u' <= 5e-3, spread <= 1e-3",
        ))
    };
    run().unwrap_or_else(|e| Check::errored(NAME, Some(7), e))
}

pub fn power_limit(_ctx: &Context) -> Check {
    const NAME: &str = "c08_power_limit";
    let run = || -> Result<Check, ZeroError> {
        let mut ok = true;
        let mut parts = Vec::new();
        for &p in &P_GRID {
            let mut devs = Vec::new();
            for &x in &[0.08, 0.04, 0.02] {
                devs.push(((x * zero::log_quantile(x, p)?).exp() - p).abs());
            }
            ok &= devs[2] <= 0.03 && devs[0] > devs[1] && devs[1] > devs[2];
            parts.push(format!("p={p}: {}", devs.iter().map(|d| sci(*d)).collect::<Vec<_>>().join(" > ")));
        }
        Ok(Check::new(
            NAME,
            Some(8),
            ok,
            parts.join("; "),
            "|m^x - p| decreasing along x = 0.08, 0.04, 0.02",
            "<= 0.03 at x = 0.02",
        ))
    };
    run().unwrap_or_else(|e| Check::errored(NAME, Some(8), e))
}

pub fn derivative_asymptotics(_ctx: &Context) -> Check {
    const NAME: &str = "c09_derivative_asymptotics";
    let ratio = |x: f64| -> Result<f64, ZeroError> {
        let fd = zero::m_prime_from_oracle(x, 0.5)?;
        let lead = zero::m_derivative_leading(1, x, 0.5)?;
        Ok(f64::from(fd.sign) * (fd.log_abs - lead.log_abs).exp())
    };
    match (ratio(0.1), ratio(0.05)) {
        (Ok(r10), Ok(r05)) => Check::new(
            NAME,
            Some(9),
            (0.8..=1.2).contains(&r05) && (r05 - 1.0).abs() < (r10 - 1.0).abs(),
            format!("ratio {r10:.4} at x = 0.1, {r05:.4} at x = 0.05"),
            "ratio in [0.8, 1.2] at x = 0.05, closer to 1 than at x = 0.1",
            "as stated",
        ),
        (Err(e), _) | (_, Err(e)) => Check::errored(NAME, Some(9), e),
    }
}

/// `Σ_{k≤K} (±1)^k c_k x^{-k/2}/k!` with `c_k` from the exact moments.
fn j_partial_sum(x: f64, kind: JKind, k_max: usize) -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            fact *= k as f64;
        }
        let sign = match kind {
            JKind::Minus if k % 2 == 1 => -1.0,
            _ => 1.0,
        };
        sum += sign * compute_c(k).eval_f64(0.0) * x.powf(-(k as f64) / 2.0) / fact;
    }
    sum
}

pub fn j_expansion(_ctx: &Context) -> Check {
    const NAME: &str = "c10_j_expansion";
    let run = || -> Result<Check, oracle::OracleError> {
        let mut ok = true;
        let mut parts = Vec::new();
        for (kind, label) in [(JKind::Minus, "J1"), (JKind::Plus, "J2")] {
            let errs: Vec<f64> = [25.0, 100.0, 400.0]
                .iter()
                .map(|&x| oracle::numeric_j(x, kind, 1e-13).map(|j| (j - j_partial_sum(x, kind, 3)).abs()))
                .collect::<Result<_, _>>()?;
            let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
            // x^{-2} predicts 16 per factor 4 in x
            ok &= ratios.iter().all(|r| (16.0 / 3.0..=48.0).contains(r));
            parts.push(format!("{label} error ratios {:.2}, {:.2}", ratios[0], ratios[1]));
        }
        let quad = oracle::numeric_j(5.0, JKind::Plus, 1e-13)?;
        let closed = oracle::j2_closed_form(5.0)?;
        let dev = (quad - closed).abs();
        ok &= dev <= 1e-10;
        parts.push(format!("J2(5) = {quad:.15}, |quad - x^(1/2-x) e^x Gamma(x,x)| {}", sci(dev)));
        Ok(Check::new(
            NAME,
            Some(10),
            ok,
            parts.join("; "),
            "ratios 16 (x^-2 scaling); J2 identity (prefactor corrected, see d02)",
            "ratios within factor 3; identity 1e-10",
        ))
    };
    run().unwrap_or_else(|e| Check::errored(NAME, Some(10), e))
}

pub fn oracle_consistency(ctx: &Context) -> Check {
    const NAME: &str = "c11_oracle_consistency";
    const XS: [f64; 5] = [0.5, 1.0, 2.0, 10.0, 100.0];
    const PS: [f64; 5] = [0.01, 0.25, 0.5, 0.75, 0.99];
    let run = || -> Result<Check, oracle::OracleError> {
        let mut worst: f64 = 0.0;
        let mut monotone = true;
        for &p in &PS {
            let mut prev = 0.0;
            for &x in &XS {
                let q = oracle::quantile(x, p, ctx.config.oracle_tol)?.value;
                worst = worst.max((oracle::reg_lower_gamma(x, q)? - p).abs());
                monotone &= q > prev;
                prev = q;
            }
        }
        Ok(Check::new(
            NAME,
            Some(11),
            worst <= 1e-12 && monotone,
            format!("max |P(x, m) - p| = {}; strictly increasing in x: {monotone}", sci(worst)),
            "x in {0.5, 1, 2, 10, 100}, p in {0.01, 0.25, 0.5, 0.75, 0.99}",
            "1e-12",
        ))
    };
    run().unwrap_or_else(|e| Check::errored(NAME, Some(11), e))
}

pub fn tau2_printed_form(ctx: &Context) -> Check {
    const NAME: &str = "d01_tau2_printed_form";
    let table = match ctx.table() {
        Ok(t) => t,
        Err(e) => return Check::errored(NAME, None, e),
    };
    let printed = ctx.fixtures.tau2_printed_poly();
    let computed = table.tau(2).expect("order >= 2").clone();
    let diff = &computed - &printed;
    let only_l2 = diff.support() == vec![2];
    let run = || -> Result<(f64, f64, f64), oracle::OracleError> {
        // x (m − Σ_{n≤1} τ_n x^{−n/2}) − τ_3 x^{−1/2} → τ_2(L)
        let (x, l) = (1e4f64, 1.5f64);
        let p = 0.5 * libm::erfc(l / std::f64::consts::SQRT_2);
        let l = oracle::gaussian_quantile(p);
        let m = oracle::quantile(x, p, 1e-13)?.value;
        let head: f64 = (-2..=1).map(|n| table.tau(n).unwrap().eval_f64(l) * x.powf(-(n as f64) / 2.0)).sum();
        let tail = table.tau(3).map_or(0.0, |t| t.eval_f64(l)) / x.sqrt();
        Ok((x * (m - head) - tail, computed.eval_f64(l), printed.eval_f64(l)))
    };
    match run() {
        Ok((obs, corr, pr)) => Check::new(
            NAME,
            None,
            only_l2 && (obs - corr).abs() < 0.1 * (obs - pr).abs(),
            format!(
                "computed - printed = {diff}; oracle at x = 1e4, L = 1.5: {obs:.6} vs computed {corr:.6}, printed {pr:.6}"
            ),
            "printed tau_2 wrong only in the L^2 coefficient; oracle sides with the computed one",
            "oracle within 10% of the gap",
        ),
        Err(e) => Check::errored(NAME, None, e),
    }
}

pub fn j2_printed_prefactor(_ctx: &Context) -> Check {
    const NAME: &str = "d02_j2_printed_prefactor";
    let run = || -> Result<f64, oracle::OracleError> {
        let x = 5.0f64;
        let quad = oracle::numeric_j(x, JKind::Plus, 1e-13)?;
        // x^{3/2−x} e^x Γ(x, x)
        let printed = oracle::reg_upper_gamma(x, x)? * ((1.5 - x) * x.ln() + x + oracle::ln_gamma(x)).exp();
        Ok(printed / quad)
    };
    match run() {
        Ok(r) => Check::new(
            NAME,
            None,
            (r - 5.0).abs() < 1e-9,
            format!("x^(3/2-x) e^x Gamma(x,x) / J2 at x = 5: {r:.12}"),
            "5 (printed prefactor is off by a factor x)",
            "1e-9",
        ),
        Err(e) => Check::errored(NAME, None, e),
    }
}

pub fn z_printed_form(ctx: &Context) -> Check {
    const NAME: &str = "d03_z_printed_form";
    let coeffs = match ctx.coeffs() {
        Ok(c) => *c,
        Err(e) => return Check::errored(NAME, None, e),
    };
    let run = || -> Result<Check, ZeroError> {
        let mut ok = true;
        let mut parts = Vec::new();
        for n in 1..=2usize {
            let k = 2 * n as i64 - 2;
            let est = zero::z_estimate(n, 0.5, 0.04, &coeffs)?;
            let triples = zero::z_coefficient_by_triples(n, k, 0.5, &coeffs)?;
            let printed = zero::z_coefficient(n, k, 0.5, &coeffs)?;
            ok &= (est - triples).abs() < 1e-4 && (est - printed).abs() > 1e-2;
            parts.push(format!("z_{{{k},{n}}}: oracle {est:.6}, triple sum {triples:.6}, printed {printed:.6}"));
        }
        Ok(Check::new(
            NAME,
            None,
            ok,
            parts.join("; "),
            "oracle matches the triple sum and not the printed closed form",
            "1e-4 agreement, 1e-2 separation",
        ))
    };
    run().unwrap_or_else(|e| Check::errored(NAME, None, e))
}

pub fn phi_integral_identity(ctx: &Context) -> Check {
    const NAME: &str = "d04_phi_integral_identity";
    let run = || -> Result<f64, oracle::OracleError> {
        let (x, p) = (50.0f64, 0.5);
        let j1 = oracle::numeric_j(x, JKind::Minus, 1e-13)?;
        let j2 = oracle::numeric_j(x, JKind::Plus, 1e-13)?;
        let m = oracle::quantile(x, p, ctx.config.oracle_tol)?.value;
        let upper = x.sqrt() * (x / m).ln();
        Ok(((1.0 - p) * j1 - p * j2 - oracle::j1_partial(x, upper, 1e-14)?).abs())
    };
    match run() {
        Ok(dev) => Check::new(
            NAME,
            None,
            dev <= 1e-8,
            format!("|(1-p) J1 - p J2 - integral to sqrt(x) phi_p| = {}", sci(dev)),
            "0 at p = 1/2, x = 50",
            "1e-8",
        ),
        Err(e) => Check::errored(NAME, None, e),
    }
}

pub fn regression_constants(ctx: &Context) -> Check {
    const NAME: &str = "d05_regression_constants";
    let c = &ctx.fixtures.constants;
    let mut parts = Vec::new();
    let mut ok = true;
    let digits = c.euler_gamma.len().saturating_sub(2);
    let gamma = zero::euler_gamma_decimal(digits);
    ok &= gamma == c.euler_gamma;
    parts.push(format!("gamma {digits} digits {}", if gamma == c.euler_gamma { "equal" } else { "differ" }));
    match oracle::reg_lower_gamma(0.5, 1.0) {
        Ok(v) => {
            ok &= (v - c.erf_one).abs() <= 1e-14;
            parts.push(format!("P(1/2, 1) - erf(1) {}", sci(v - c.erf_one)));
        }
        Err(e) => {
            ok = false;
            parts.push(format!("P(1/2, 1) error: {e}"));
        }
    }
    match ctx.coeffs() {
        Ok(k) => {
            let (d1, d2) = (k.s1 - c.s1, k.s2 - c.s2);
            ok &= d1.abs() <= 1e-11 && d2.abs() <= 1e-11;
            parts.push(format!("s1 {}, s2 {}", sci(d1), sci(d2)));
        }
        Err(e) => {
            ok = false;
            parts.push(format!("s_q error: {e}"));
        }
    }
    match oracle::numeric_j(5.0, JKind::Plus, 1e-13) {
        Ok(j) => {
            ok &= (j - c.j2_at_5).abs() <= 1e-11;
            parts.push(format!("J2(5) {}", sci(j - c.j2_at_5)));
        }
        Err(e) => {
            ok = false;
            parts.push(format!("J2 error: {e}"));
        }
    }
    Check::new(NAME, None, ok, parts.join("; "), "fixture constants", "gamma exact; erf 1e-14; s_q 1e-11; J2 1e-11")
}
