//! Dense univariate polynomials over the arbitrary-precision rationals.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BigRational, ExactError};

/// A polynomial `c0 + c1*t + c2*t^2 + ...` with exact rational coefficients.
///
/// The coefficient vector never carries trailing zeros, so structural
/// equality is polynomial equality and the zero polynomial is the empty vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * t^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    /// The identity polynomial `t`.
    pub fn var() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Convenience constructor from `(numerator, denominator)` pairs, lowest power first.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::from_coeffs(pairs.iter().map(|&(n, d)| super::rat(n, d)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `t^k`; zero beyond the degree.
    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// `p(-t)`.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
            .collect();
        Self { coeffs }
    }

    /// Only even powers carry nonzero coefficients.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    /// Only odd powers carry nonzero coefficients.
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(Zero::is_zero)
    }

    /// Powers whose coefficient is nonzero, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    /// Horner evaluation in double precision.
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + rational_to_f64(c))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// Renders with the given variable name, e.g. `"1/3 + 1/6*L^2"`.
    pub fn display_with<'a>(&'a self, var: &'a str) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, var }
    }

    /// Parses the text form produced by [`RatPoly::display_with`].
    pub fn parse_with(s: &str, var: &str) -> Result<Self, ExactError> {
        parse_poly(s, var)
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub(crate) fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a RatPoly,
    var: &'a str,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.poly.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = if first { c.clone() } else { c.abs() };
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            f.write_str(&fmt_rational(&mag))?;
            match k {
                0 => {}
                1 => write!(f, "*{}", self.var)?,
                _ => write!(f, "*{}^{}", self.var, k)?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display_with("L").fmt(f)
    }
}

impl FromStr for RatPoly {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_poly(s, "L")
    }
}

fn parse_poly(s: &str, var: &str) -> Result<RatPoly, ExactError> {
    let bad = |why: &str| ExactError::Parse(format!("{why} in {s:?}"));
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad("empty polynomial"));
    }

    // split into signed terms at top-level '+' / '-' (never inside an exponent)
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut negative = false;
    let mut current = String::new();
    for ch in compact.chars() {
        if (ch == '+' || ch == '-') && !current.is_empty() && !current.ends_with('^') {
            terms.push((negative, std::mem::take(&mut current)));
            negative = ch == '-';
        } else if (ch == '+' || ch == '-') && current.is_empty() {
            if ch == '-' {
                negative = !negative;
            }
        } else {
            current.push(ch);
        }
    }
    if current.is_empty() {
        return Err(bad("dangling sign"));
    }
    terms.push((negative, current));

    let mut acc = RatPoly::zero();
    for (neg, term) in terms {
        let (coef_txt, power) = match term.find(var) {
            None => (term.as_str(), 0usize),
            Some(pos) => {
                let head = term[..pos].trim_end_matches('*');
                let tail = &term[pos + var.len()..];
                let power = if tail.is_empty() {
                    1
                } else {
                    tail.strip_prefix('^')
                        .ok_or_else(|| bad("expected '^'"))?
                        .parse::<usize>()
                        .map_err(|_| bad("bad exponent"))?
                };
                (head, power)
            }
        };
        let mut c = if coef_txt.is_empty() {
            BigRational::one()
        } else {
            parse_rational(coef_txt).ok_or_else(|| bad("bad coefficient"))?
        };
        if neg {
            c = -c;
        }
        acc += RatPoly::monomial(c, power);
    }
    Ok(acc)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

impl Add<&RatPoly> for &RatPoly {
    type Output = RatPoly;

    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        RatPoly::from_coeffs(coeffs)
    }
}

impl Sub<&RatPoly> for &RatPoly {
    type Output = RatPoly;

    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        RatPoly::from_coeffs(coeffs)
    }
}

impl Mul<&RatPoly> for &RatPoly {
    type Output = RatPoly;

    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RatPoly::from_coeffs(coeffs)
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;

    fn neg(self) -> RatPoly {
        RatPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RatPoly> for RatPoly {
            type Output = RatPoly;
            fn $m(self, rhs: RatPoly) -> RatPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RatPoly> for RatPoly {
            type Output = RatPoly;
            fn $m(self, rhs: &RatPoly) -> RatPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<RatPoly> for &RatPoly {
            type Output = RatPoly;
            fn $m(self, rhs: RatPoly) -> RatPoly {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RatPoly {
    type Output = RatPoly;

    fn neg(self) -> RatPoly {
        -&self
    }
}

impl AddAssign<&RatPoly> for RatPoly {
    fn add_assign(&mut self, rhs: &RatPoly) {
        *self = &*self + rhs;
    }
}

impl AddAssign<RatPoly> for RatPoly {
    fn add_assign(&mut self, rhs: RatPoly) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&RatPoly> for RatPoly {
    fn sub_assign(&mut self, rhs: &RatPoly) {
        *self = &*self - rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn p(pairs: &[(i64, i64)]) -> RatPoly {
        RatPoly::from_ratios(pairs)
    }

    #[test]
    fn derivative_of_cube() {
        let cube = RatPoly::monomial(rat(1, 1), 3);
        assert_eq!(cube.derivative(), RatPoly::monomial(rat(3, 1), 2));
    }

    #[test]
    fn product_example() {
        let a = p(&[(1, 1), (0, 1), (1, 1)]);
        let b = p(&[(-1, 1), (1, 1)]);
        assert_eq!(&a * &b, p(&[(-1, 1), (1, 1), (-1, 1), (1, 1)]));
    }

    #[test]
    fn evaluate_at_half() {
        let a = p(&[(0, 1), (-1, 1), (1, 1)]);
        assert_eq!(a.eval(&rat(1, 2)), rat(-1, 4));
    }

    #[test]
    fn trailing_zeros_are_dropped() {
        let a = p(&[(1, 2), (0, 1), (0, 1)]);
        assert_eq!(a.degree(), Some(0));
        assert!((&a - &a).is_zero());
        assert_eq!((&a - &a).degree(), None);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        assert!(RatPoly::constant(rat(7, 3)).derivative().is_zero());
    }

    #[test]
    fn display_and_parse() {
        let tau2 = p(&[(8, 405), (0, 1), (-1, 810), (0, 1), (-1, 270)]);
        let text = tau2.to_string();
        assert_eq!(text, "8/405 - 1/810*L^2 - 1/270*L^4");
        assert_eq!(text.parse::<RatPoly>().unwrap(), tau2);
        assert_eq!(RatPoly::zero().to_string(), "0");
        assert_eq!(p(&[(-1, 3), (1, 1)]).display_with("t").to_string(), "-1/3 + 1*t");
    }

    #[test]
    fn parse_accepts_loose_forms() {
        let a = RatPoly::parse_with("-s^2 + 3/4*s - 2", "s").unwrap();
        assert_eq!(a, p(&[(-2, 1), (3, 4), (-1, 1)]));
        let b: RatPoly = "1/3 + 1/6*L^2".parse().unwrap();
        assert_eq!(b, p(&[(1, 3), (0, 1), (1, 6)]));
        assert!("1/0*L".parse::<RatPoly>().is_err());
        assert!("".parse::<RatPoly>().is_err());
        assert!("3*L^x".parse::<RatPoly>().is_err());
    }

    #[test]
    fn parity_helpers() {
        let even = p(&[(1, 1), (0, 1), (2, 1)]);
        let odd = p(&[(0, 1), (1, 1), (0, 1), (5, 1)]);
        assert!(even.is_even() && !even.is_odd());
        assert!(odd.is_odd() && !odd.is_even());
        assert_eq!(odd.reflect(), -&odd);
        assert_eq!(even.reflect(), even);
        assert!(RatPoly::zero().is_even() && RatPoly::zero().is_odd());
    }

    #[test]
    fn huge_coefficients_convert_to_f64() {
        let big = BigInt::from(10).pow(400);
        let c = BigRational::new(big.clone() + 1, big);
        assert!((rational_to_f64(&c) - 1.0).abs() < 1e-15);
    }
}
