//! Exact derivation of the large-shape expansions
//!
//! ```text
//! √x·φ_p(x) − L ~ Σ_{k≥1} a_k(L) x^{-k/2},      φ_p(x) = log(x / m_p(x))
//! m_p(x)        ~ Σ_{n≥-2} τ_n(L) x^{-n/2}
//! ```
//!
//! where `L = L_p` is the Gaussian quantile. Every coefficient is a
//! polynomial in `L` with rational coefficients. They are produced by a
//! recursion over `SymExpr` in which the `E = exp(-L²/2)` factor has to divide
//! out exactly at each step; a failure to do so is reported, not ignored.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{double_factorial, factorial, BigRational, ExactError, RatPoly, SymExpr};
use crate::qpolys::{gen_q, q_derivative_from};

/// Order used when none is given.
pub const DEFAULT_ORDER: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("c_{k} is not of the expected pure form (G-multiple for even k, rational for odd k): {value}")]
    ParityContractViolation { k: usize, value: String },
    #[error("requested order {requested} exceeds table order {available}")]
    TableOrderExceeded { requested: i64, available: i64 },
    #[error("A_k is defined for k >= 1")]
    InvalidIndex,
}

/// `∫₀^∞ s^j e^{-s²/2} ds`: `(j−1)!!` for odd `j`, `(j−1)!!·G` for even `j`.
pub fn gauss_moment_full(j: usize) -> SymExpr {
    let c = RatPoly::constant(BigRational::from_integer(double_factorial(j as i64 - 1)));
    if j % 2 == 1 {
        SymExpr::plain(c)
    } else {
        SymExpr::g_times(c)
    }
}

/// `∫₀^L s^j e^{-s²/2} ds` through `I_j = −L^{j−1}E + (j−1) I_{j−2}`,
/// `I_0 = Φ`, `I_1 = 1 − E`.
pub fn gauss_moment_partial(j: usize) -> SymExpr {
    let mut acc = if j.is_multiple_of(2) {
        SymExpr::basis_phi()
    } else {
        &SymExpr::one() - &SymExpr::basis_e()
    };
    for m in (j % 2 + 2..=j).step_by(2) {
        let tail = SymExpr::e_times(RatPoly::monomial(-BigRational::one(), m - 1));
        acc = &tail + &acc.scale_rational(&BigRational::from_integer(BigInt::from(m - 1)));
    }
    acc
}

fn moment_sum(k: usize, moment: impl Fn(usize) -> SymExpr) -> SymExpr {
    let integrand = gen_q(k).shift(k);
    integrand
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(SymExpr::zero(), |acc, (m, c)| &acc + &moment(m).scale_rational(c))
}

/// `c_k = ∫₀^∞ s^k Q_k(s) e^{-s²/2} ds`.
pub fn compute_c(k: usize) -> SymExpr {
    moment_sum(k, gauss_moment_full)
}

/// `d_k = ∫₀^L s^k Q_k(s) e^{-s²/2} ds`.
pub fn compute_d(k: usize) -> SymExpr {
    moment_sum(k, gauss_moment_partial)
}

/// `A_k = ((1−p)(−1)^k c_k − p c_k − (−1)^k d_k)/k!` with `1 − 2p = Φ/G`
/// substituted through the parity of `k`, so `G` never needs inverting:
/// odd `k` gives `(d_k − c_k)/k!`, even `k` with `c_k = βG` gives `(βΦ − d_k)/k!`.
pub fn compute_a_term(k: usize) -> Result<SymExpr, ExpansionError> {
    if k == 0 {
        return Err(ExpansionError::InvalidIndex);
    }
    let c = compute_c(k);
    let d = compute_d(k);
    let violation = || ExpansionError::ParityContractViolation { k, value: c.to_string() };
    if !c.e_part().is_zero() || !c.phi_part().is_zero() {
        return Err(violation());
    }
    let numer = if k % 2 == 1 {
        if !c.g_part().is_zero() {
            return Err(violation());
        }
        &d - &c
    } else {
        if !c.plain_part().is_zero() {
            return Err(violation());
        }
        &SymExpr::phi_times(c.g_part().clone()) - &d
    };
    let inv = BigRational::new(BigInt::one(), factorial(k));
    Ok(numer.scale_rational(&inv))
}

/// The seed `a_1 = (1 + L²/2)/3`.
pub fn seed_a1() -> RatPoly {
    RatPoly::from_ratios(&[(1, 3), (0, 1), (1, 6)])
}

/// Exact coefficient tables for the large-shape expansions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionTable {
    order: usize,
    a_coeffs: Vec<RatPoly>,
    tau_coeffs: Vec<RatPoly>,
    power_cache: BTreeMap<(usize, usize), RatPoly>,
    /// Number of exact divisions by `E` performed during construction.
    divisions: usize,
}

/// Serializable form: `{"a": [{"k":1,"poly":"..."}], "tau": [{"n":-2,"poly":"..."}]}`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientListing {
    pub order: usize,
    pub a: Vec<IndexedPoly>,
    pub tau: Vec<IndexedPoly>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexedPoly {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    pub poly: String,
}

impl ExpansionTable {
    /// Runs the full recursion: `a_1 … a_{M+1}` then `τ_{-2} … τ_M`.
    pub fn build(order: usize) -> Result<Self, ExpansionError> {
        let mut recursion = PhiRecursion::new(order);
        recursion.run()?;
        let tau_coeffs = compose_tau_from(&recursion.a_coeffs(), order);
        Ok(Self {
            order,
            a_coeffs: recursion.a_coeffs(),
            tau_coeffs,
            power_cache: recursion.cache,
            divisions: recursion.divisions,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `a_1 … a_{M+1}`.
    pub fn a_coeffs(&self) -> &[RatPoly] {
        &self.a_coeffs
    }

    /// `a_k`, `k ≥ 1`.
    pub fn a(&self, k: usize) -> Option<&RatPoly> {
        k.checked_sub(1).and_then(|i| self.a_coeffs.get(i))
    }

    /// `τ_{-2} … τ_M`.
    pub fn tau_coeffs(&self) -> &[RatPoly] {
        &self.tau_coeffs
    }

    /// `τ_n`, `n ≥ -2`.
    pub fn tau(&self, n: i64) -> Option<&RatPoly> {
        usize::try_from(n + 2).ok().and_then(|i| self.tau_coeffs.get(i))
    }

    /// Coefficient of `x^{-l/2}` in `(√x φ_p − L)^{j+1}`, when it was needed.
    pub fn power_coeff(&self, j: usize, l: usize) -> Option<&RatPoly> {
        self.power_cache.get(&(j, l))
    }

    pub fn power_cache(&self) -> &BTreeMap<(usize, usize), RatPoly> {
        &self.power_cache
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    /// `Σ_{n=-2}^{order} τ_n(L) x^{-n/2}` in double precision.
    pub fn eval_expansion(&self, x: f64, l: f64, order: i64) -> Result<f64, ExpansionError> {
        if order > self.order as i64 || order < -2 {
            return Err(ExpansionError::TableOrderExceeded {
                requested: order,
                available: self.order as i64,
            });
        }
        let y = x.sqrt().recip();
        // highest power first keeps the small terms from being swamped
        let mut acc = 0.0;
        for n in (-2..=order).rev() {
            acc += self.tau(n).expect("within table").eval_f64(l) * y.powi(n as i32);
        }
        Ok(acc)
    }

    /// `√x φ_p(x) − L` truncated after `a_order`.
    pub fn eval_phi_remainder(&self, x: f64, l: f64, order: usize) -> f64 {
        let y = x.sqrt().recip();
        self.a_coeffs
            .iter()
            .take(order)
            .enumerate()
            .map(|(i, a)| a.eval_f64(l) * y.powi(i as i32 + 1))
            .sum()
    }

    pub fn listing(&self) -> CoefficientListing {
        CoefficientListing {
            order: self.order,
            a: self
                .a_coeffs
                .iter()
                .enumerate()
                .map(|(i, p)| IndexedPoly { k: Some(i as i64 + 1), n: None, poly: p.to_string() })
                .collect(),
            tau: self
                .tau_coeffs
                .iter()
                .enumerate()
                .map(|(i, p)| IndexedPoly { k: None, n: Some(i as i64 - 2), poly: p.to_string() })
                .collect(),
        }
    }
}

/// State of the `a_{N+1}` recursion. `cache[(j, l)]` is the coefficient of
/// `y^l` in `(Σ_k a_k y^k)^{j+1}`; `cache[(0, k)] = a_k`.
struct PhiRecursion {
    order: usize,
    cache: BTreeMap<(usize, usize), RatPoly>,
    /// `s^k Q_k(s)` for each `k` used
    bases: Vec<RatPoly>,
    divisions: usize,
}

impl PhiRecursion {
    fn new(order: usize) -> Self {
        let mut cache = BTreeMap::new();
        cache.insert((0, 1), seed_a1());
        let bases = (0..=order).map(|k| gen_q(k).shift(k)).collect();
        Self { order, cache, bases, divisions: 0 }
    }

    fn a(&self, k: usize) -> RatPoly {
        self.cache.get(&(0, k)).cloned().unwrap_or_default()
    }

    fn a_coeffs(&self) -> Vec<RatPoly> {
        (1..=self.order + 1).map(|k| self.a(k)).collect()
    }

    /// Coefficient of `y^l` in the `(j+1)`-th power, by convolution with the
    /// `j`-th power.
    fn power(&mut self, j: usize, l: usize) -> RatPoly {
        if j == 0 {
            return self.a(l);
        }
        if let Some(p) = self.cache.get(&(j, l)) {
            return p.clone();
        }
        let mut acc = RatPoly::zero();
        // (j)-th power starts at y^j, a_k at y^1
        for m in j..l {
            let lower = self.power(j - 1, m);
            let a = self.a(l - m);
            if !lower.is_zero() && !a.is_zero() {
                acc += &lower * &a;
            }
        }
        self.cache.insert((j, l), acc.clone());
        acc
    }

    fn step(&mut self, n: usize) -> Result<(), ExpansionError> {
        let mut sum = SymExpr::zero();
        for k in 0..=n {
            let l = n + 1 - k;
            let j_min = if k == 0 { 1 } else { 0 };
            for j in j_min..l {
                let power = self.power(j, l);
                if power.is_zero() {
                    continue;
                }
                let q = q_derivative_from(&self.bases[k], j);
                let denom = factorial(k) * factorial(j + 1);
                let sign = if k % 2 == 0 { -BigInt::one() } else { BigInt::one() };
                let weight = BigRational::new(sign, denom);
                sum = &sum + &q.scale(&power).scale_rational(&weight);
            }
        }
        sum = &sum + &compute_a_term(n + 1)?;
        let next = sum.div_by_e()?;
        self.divisions += 1;
        self.cache.insert((0, n + 1), next);
        Ok(())
    }

    fn run(&mut self) -> Result<(), ExpansionError> {
        for n in 1..=self.order {
            self.step(n)?;
        }
        Ok(())
    }
}

/// `a_1 … a_{M+1}`.
pub fn phi_coefficients(order: usize) -> Result<Vec<RatPoly>, ExpansionError> {
    let mut recursion = PhiRecursion::new(order);
    recursion.run()?;
    Ok(recursion.a_coeffs())
}

/// `τ_{-2} … τ_M` for the given order.
pub fn compose_tau(order: usize) -> Result<Vec<RatPoly>, ExpansionError> {
    Ok(compose_tau_from(&phi_coefficients(order)?, order))
}

/// With `y = x^{-1/2}` and `φ = L y + Σ_l a_l y^{l+1}`, expands
/// `m = y^{-2} exp(−φ)` through `y^{M+2}`; needs `a_1 … a_{M+1}`.
pub fn compose_tau_from(a_coeffs: &[RatPoly], order: usize) -> Vec<RatPoly> {
    let len = order + 3;
    assert!(a_coeffs.len() > order, "need a_1 … a_{{M+1}} for order M");
    // g = −φ as a series in y
    let mut g = vec![RatPoly::zero(); len];
    g[1] = -RatPoly::var();
    for (i, a) in a_coeffs.iter().enumerate() {
        let power = i + 2;
        if power < len {
            g[power] = -a;
        }
    }
    exp_series(&g)
}

/// `exp(g)` for a series with `g[0] = 0`, from `n f_n = Σ_{k=1}^n k g_k f_{n−k}`.
pub fn exp_series(g: &[RatPoly]) -> Vec<RatPoly> {
    assert!(g.first().is_none_or(RatPoly::is_zero), "exp_series needs g(0) = 0");
    let mut f: Vec<RatPoly> = Vec::with_capacity(g.len());
    if g.is_empty() {
        return f;
    }
    f.push(RatPoly::one());
    for n in 1..g.len() {
        let mut acc = RatPoly::zero();
        for k in 1..=n {
            if g[k].is_zero() || f[n - k].is_zero() {
                continue;
            }
            let w = BigRational::from_integer(BigInt::from(k));
            acc += (&g[k] * &f[n - k]).scale(&w);
        }
        f.push(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(n))));
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn full_moments() {
        assert_eq!(gauss_moment_full(0), SymExpr::basis_g());
        assert_eq!(gauss_moment_full(1), SymExpr::one());
        assert_eq!(gauss_moment_full(4), SymExpr::g_times(RatPoly::constant(rat(3, 1))));
        assert_eq!(gauss_moment_full(5), SymExpr::plain(RatPoly::constant(rat(8, 1))));
    }

    #[test]
    fn partial_moments() {
        assert_eq!(gauss_moment_partial(0), SymExpr::basis_phi());
        assert_eq!(gauss_moment_partial(1), &SymExpr::one() - &SymExpr::basis_e());
        let want = SymExpr::from_parts(
            RatPoly::constant(rat(2, 1)),
            RatPoly::from_ratios(&[(-2, 1), (0, 1), (-1, 1)]),
            RatPoly::zero(),
            RatPoly::zero(),
        );
        assert_eq!(gauss_moment_partial(3), want);
    }

    #[test]
    fn partial_moment_derivative_is_integrand() {
        for j in 0..9 {
            let d = gauss_moment_partial(j).diff();
            assert_eq!(d, SymExpr::e_times(RatPoly::monomial(rat(1, 1), j)), "j={j}");
        }
    }

    #[test]
    fn partial_moments_numerically() {
        // trapezoid oracle on a fine grid
        for j in 0..6 {
            for &l in &[0.7, 1.9, -1.2] {
                let n = 20_000;
                let h = l / n as f64;
                let f = |s: f64| s.powi(j as i32) * (-0.5 * s * s).exp();
                let mut acc = 0.5 * (f(0.0) + f(l));
                for i in 1..n {
                    acc += f(i as f64 * h);
                }
                let trap = acc * h;
                let exact = gauss_moment_partial(j).eval_f64(l);
                assert!((trap - exact).abs() < 1e-8, "j={j} L={l}: {trap} vs {exact}");
            }
        }
    }

    #[test]
    fn c_and_d_low_order() {
        assert_eq!(compute_c(0), SymExpr::basis_g());
        assert_eq!(compute_c(1), SymExpr::plain(RatPoly::constant(rat(-1, 3))));
        let d1 = SymExpr::from_parts(
            RatPoly::constant(rat(-1, 3)),
            RatPoly::from_ratios(&[(1, 3), (0, 1), (1, 6)]),
            RatPoly::zero(),
            RatPoly::zero(),
        );
        assert_eq!(compute_d(1), d1);
    }

    #[test]
    fn c_parity_forms() {
        for k in 0..10 {
            let c = compute_c(k);
            assert!(c.e_part().is_zero() && c.phi_part().is_zero());
            if k % 2 == 0 {
                assert!(c.plain_part().is_zero(), "c_{k}");
            } else {
                assert!(c.g_part().is_zero(), "c_{k}");
            }
        }
    }

    #[test]
    fn a_terms() {
        assert!(matches!(compute_a_term(0), Err(ExpansionError::InvalidIndex)));
        let a1 = compute_a_term(1).unwrap();
        assert_eq!(a1, SymExpr::e_times(seed_a1()));
        assert_eq!(a1.div_by_e().unwrap(), seed_a1());
        for k in 1..9 {
            assert!(compute_a_term(k).unwrap().g_part().is_zero(), "A_{k} has a G part");
        }
    }

    #[test]
    fn first_phi_coefficients() {
        let a = phi_coefficients(1).unwrap();
        assert_eq!(a[0], RatPoly::from_ratios(&[(1, 3), (0, 1), (1, 6)]));
        assert_eq!(a[1], RatPoly::from_ratios(&[(0, 1), (5, 36), (0, 1), (1, 36)]));
    }

    #[test]
    fn leading_tau() {
        let tau = compose_tau(2).unwrap();
        assert_eq!(tau[0], RatPoly::one());
        assert_eq!(tau[1], -RatPoly::var());
        assert_eq!(tau[2], RatPoly::from_ratios(&[(-1, 3), (0, 1), (1, 3)]));
        assert_eq!(tau[3], RatPoly::from_ratios(&[(0, 1), (7, 36), (0, 1), (-1, 36)]));
        assert_eq!(tau[4], RatPoly::from_ratios(&[(8, 405), (0, 1), (-7, 810), (0, 1), (-1, 270)]));
    }

    #[test]
    fn power_cache_holds_a_and_squares() {
        let table = ExpansionTable::build(3).unwrap();
        for k in 1..=4 {
            assert_eq!(table.power_coeff(0, k), table.a(k));
        }
        let a1 = table.a(1).unwrap();
        assert_eq!(table.power_coeff(1, 2).unwrap(), &(a1 * a1));
        assert_eq!(table.divisions(), 3);
    }

    #[test]
    fn exp_series_of_linear() {
        // exp(y) = 1 + y + y²/2 + y³/6
        let g = vec![RatPoly::zero(), RatPoly::one(), RatPoly::zero(), RatPoly::zero()];
        let f = exp_series(&g);
        let want: Vec<RatPoly> = [(1, 1), (1, 1), (1, 2), (1, 6)]
            .iter()
            .map(|&(n, d)| RatPoly::constant(rat(n, d)))
            .collect();
        assert_eq!(f, want);
    }

    #[test]
    fn eval_expansion_examples() {
        let table = ExpansionTable::build(2).unwrap();
        let got = table.eval_expansion(100.0, 0.0, 2).unwrap();
        let want = 100.0 - 1.0 / 3.0 + (8.0 / 405.0) / 100.0;
        assert!((got - want).abs() < 1e-12);
        assert_eq!(table.eval_expansion(4.0, 0.0, -2).unwrap(), 4.0);
        assert!(matches!(
            table.eval_expansion(4.0, 0.0, 3),
            Err(ExpansionError::TableOrderExceeded { .. })
        ));
        assert!(table.eval_expansion(4.0, 0.0, -3).is_err());
    }

    #[test]
    fn tau_parity_and_degree() {
        let table = ExpansionTable::build(DEFAULT_ORDER).unwrap();
        for n in -2..=DEFAULT_ORDER as i64 {
            let t = table.tau(n).unwrap();
            if n.rem_euclid(2) == 0 {
                assert!(t.is_even(), "tau_{n}");
            } else {
                assert!(t.is_odd(), "tau_{n}");
            }
            assert!(t.degree().unwrap() as i64 <= n + 2, "deg tau_{n}");
        }
    }

    #[test]
    fn listing_schema() {
        let table = ExpansionTable::build(1).unwrap();
        let json = serde_json::to_value(table.listing()).unwrap();
        assert_eq!(json["a"][0]["k"], 1);
        assert_eq!(json["a"][0]["poly"], "1/3 + 1/6*L^2");
        assert_eq!(json["tau"][0]["n"], -2);
        assert_eq!(json["tau"][1]["poly"], "-1*L");
    }
}
