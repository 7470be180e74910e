//! Exact arithmetic: rationals, rational polynomials, and the four-basis
//! symbolic algebra in which the large-shape coefficients are derived.

mod poly;
mod sym;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

pub use num_rational::BigRational;
pub use poly::{PolyDisplay, RatPoly};
pub use sym::SymExpr;

pub(crate) use poly::rational_to_f64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    /// Division by `E` was requested while the plain, `Φ` or `G` component
    /// was still nonzero.
    #[error("non-vanishing residual before division by E: plain = {plain}, Phi = {phi}, G = {g}")]
    NonVanishingResidual { plain: String, phi: String, g: String },
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `n!!`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}
