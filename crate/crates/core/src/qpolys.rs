//! The polynomials `Q_n(s)` defined by
//! `∂_v^n exp(-s² h(v)) = Q_n(s, h'(v), …, h^{(n+1)}(v)) exp(-s² h(v))`,
//! taken at `v = 0`, and the derivatives of `q_k(s) = s^k Q_k(s) exp(-s²/2)`.
//!
//! Only the value at `v = 0` is ever needed, so the recursion runs on
//! truncated Taylor jets in `v` instead of symbolic polynomials in
//! `h'(v), h''(v), …`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exactalg::{factorial, BigRational, RatPoly, SymExpr};

/// Truncated power series `c0 + c1 v + … + c_order v^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    coeffs: Vec<BigRational>,
}

impl Jet {
    /// Pads with zeros (or truncates) to exactly `order + 1` coefficients.
    pub fn new(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order + 1, BigRational::zero());
        Self { coeffs }
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    /// Value at `v = 0`.
    pub fn value(&self) -> &BigRational {
        &self.coeffs[0]
    }

    /// Loses one order of accuracy. Panics on an order-0 jet, whose
    /// derivative is not determined.
    pub fn derivative(&self) -> Self {
        assert!(self.order() >= 1, "derivative of an order-0 jet is undetermined");
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
        Self { coeffs }
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| &self.coeffs[k] + &rhs.coeffs[k]).collect();
        Jet { coeffs }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect();
        Jet { coeffs }
    }

    /// Truncated product, accurate to the smaller of the two orders.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|k| {
                (0..=k).fold(BigRational::zero(), |acc, i| {
                    acc + &self.coeffs[i] * &rhs.coeffs[k - i]
                })
            })
            .collect();
        Jet { coeffs }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        Jet::new(self.coeffs[..=order.min(self.order())].to_vec(), order.min(self.order()))
    }
}

/// Jet of `h(v) = (e^v - 1 - v)/v²`; the coefficient of `v^k` is `1/(k+2)!`.
pub fn h_jet(order: usize) -> Jet {
    let coeffs = (0..=order)
        .map(|k| BigRational::new(BigInt::one(), factorial(k + 2)))
        .collect();
    Jet { coeffs }
}

/// Polynomial in `s` whose coefficients are jets in `v`; index = power of `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SJetPoly {
    terms: Vec<Jet>,
    order: usize,
}

impl SJetPoly {
    pub fn one(order: usize) -> Self {
        Self {
            terms: vec![Jet::constant(BigRational::one(), order)],
            order,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[Jet] {
        &self.terms
    }

    /// One step of `T ← ∂_v T − s²·h'(v)·T`. `dh` must have order at least
    /// `self.order() - 1`.
    pub fn step(&self, dh: &Jet) -> Self {
        let order = self.order - 1;
        let mut terms = vec![Jet::zero(order); self.terms.len() + 2];
        for (power, jet) in self.terms.iter().enumerate() {
            terms[power] = terms[power].add(&jet.derivative());
            let product = jet.mul(dh).truncate(order);
            terms[power + 2] = terms[power + 2].sub(&product);
        }
        Self { terms, order }
    }

    /// Sets `v = 0`.
    pub fn at_zero(&self) -> RatPoly {
        RatPoly::from_coeffs(self.terms.iter().map(|j| j.value().clone()).collect())
    }
}

/// `Q_n(s)` with `y_j = h^{(j)}(0)` substituted. Even in `s`, degree `2n`.
pub fn gen_q(n: usize) -> RatPoly {
    // n differentiations each cost one order; n + 1 leaves one order of slack
    let order = n + 1;
    let dh = h_jet(order + 1).derivative();
    let mut t = SJetPoly::one(order);
    for _ in 0..n {
        t = t.step(&dh);
    }
    t.at_zero()
}

/// `q_k^{(j)}(L)` as `P(L)·E`, by `j`-fold use of `(P e^{-s²/2})' = (P' − sP) e^{-s²/2}`
/// starting from `P(s) = s^k Q_k(s)`.
pub fn q_derivative(k: usize, j: usize) -> SymExpr {
    q_derivative_from(&gen_q(k).shift(k), j)
}

/// Same as [`q_derivative`] for a precomputed `P(s) = s^k Q_k(s)`.
pub fn q_derivative_from(base: &RatPoly, j: usize) -> SymExpr {
    let s = RatPoly::var();
    let mut p = base.clone();
    for _ in 0..j {
        p = p.derivative() - &s * &p;
    }
    SymExpr::e_times(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    /// `y_j = h^{(j)}(0) = j!/(j+2)! = 1/((j+1)(j+2))`.
    fn y(j: i64) -> BigRational {
        rat(1, (j + 1) * (j + 2))
    }

    fn s_pow(c: BigRational, k: usize) -> RatPoly {
        RatPoly::monomial(c, k)
    }

    #[test]
    fn h_jet_coefficients() {
        assert_eq!(h_jet(0).coeffs(), &[rat(1, 2)]);
        assert_eq!(h_jet(2).coeffs(), &[rat(1, 2), rat(1, 6), rat(1, 24)]);
        assert_eq!(h_jet(4).coeff(3), &rat(1, 120));
    }

    #[test]
    fn h_derivatives_at_zero_match_closed_form() {
        let jet = h_jet(8);
        for j in 0..8usize {
            let deriv = jet.coeff(j) * BigRational::from_integer(factorial(j));
            assert_eq!(deriv, y(j as i64), "h^({j})(0)");
        }
    }

    #[test]
    fn jet_product_truncates() {
        let a = Jet::new(vec![rat(1, 1), rat(1, 1)], 2);
        let sq = a.mul(&a);
        assert_eq!(sq.coeffs(), &[rat(1, 1), rat(2, 1), rat(1, 1)]);
        let cube = sq.mul(&a);
        assert_eq!(cube.coeffs(), &[rat(1, 1), rat(3, 1), rat(3, 1)]);
        let low = Jet::new(vec![rat(1, 1), rat(1, 1)], 1);
        assert_eq!(sq.mul(&low).order(), 1);
    }

    #[test]
    fn small_q_polynomials() {
        assert_eq!(gen_q(0), RatPoly::one());
        assert_eq!(gen_q(1), s_pow(-y(1), 2));
        // s⁴ y1² − s² y2
        let want = s_pow(y(1) * y(1), 4) + s_pow(-y(2), 2);
        assert_eq!(gen_q(2), want);
        assert_eq!(gen_q(2), RatPoly::from_ratios(&[(0, 1), (0, 1), (-1, 12), (0, 1), (1, 36)]));
    }

    #[test]
    fn q3_matches_multivariate_form() {
        // −s⁶y1³ + 3s⁴y1y2 − s²y3
        let want = s_pow(-(y(1) * y(1) * y(1)), 6)
            + s_pow(rat(3, 1) * y(1) * y(2), 4)
            + s_pow(-y(3), 2);
        assert_eq!(gen_q(3), want);
    }

    #[test]
    fn q_polynomials_are_even_of_full_degree() {
        for n in 0..=12 {
            let q = gen_q(n);
            assert!(q.is_even(), "Q_{n} not even");
            assert_eq!(q.degree(), Some(2 * n), "deg Q_{n}");
        }
    }

    #[test]
    fn q_derivative_examples() {
        assert_eq!(q_derivative(0, 0), SymExpr::basis_e());
        assert_eq!(q_derivative(0, 1), SymExpr::e_times(-RatPoly::var()));
        assert_eq!(q_derivative(1, 0), SymExpr::e_times(s_pow(rat(-1, 6), 3)));
    }

    #[test]
    fn q_derivative_is_pure_e_and_matches_symbolic_diff() {
        for k in 0..5 {
            let mut prev = q_derivative(k, 0);
            for j in 1..5 {
                let cur = q_derivative(k, j);
                assert!(cur.plain_part().is_zero() && cur.phi_part().is_zero() && cur.g_part().is_zero());
                assert_eq!(cur, prev.diff(), "k={k} j={j}");
                prev = cur;
            }
        }
    }
}
