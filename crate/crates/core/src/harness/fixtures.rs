//! Reviewed reference values, loaded from `fixtures/fixtures.toml`.

use std::path::Path;

use serde::Deserialize;

use super::HarnessError;
use crate::exactalg::{BigRational, RatPoly};

const BUILTIN: &str = include_str!("../../fixtures/fixtures.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub euler_gamma: String,
    pub erf_one: f64,
    pub s1: f64,
    pub s2: f64,
    pub j2_at_5: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauEntry {
    pub n: i64,
    pub poly: String,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyEntry {
    pub poly: String,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AEntry {
    pub k: usize,
    pub poly: String,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QTerm {
    pub coeff: String,
    pub s: usize,
    pub y: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QEntry {
    pub n: usize,
    pub source: String,
    pub terms: Vec<QTerm>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixtures {
    pub constants: Constants,
    pub tau: Vec<TauEntry>,
    pub tau2_printed: PolyEntry,
    pub a: Vec<AEntry>,
    pub q: Vec<QEntry>,
}

fn parse_poly(s: &str) -> Result<RatPoly, HarnessError> {
    s.parse::<RatPoly>().map_err(|e| HarnessError::Fixture(format!("{s:?}: {e}")))
}

fn parse_rational(s: &str) -> Result<BigRational, HarnessError> {
    s.trim().parse::<BigRational>().map_err(|e| HarnessError::Fixture(format!("{s:?}: {e}")))
}

impl Fixtures {
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN).expect("bundled fixtures parse")
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let fixtures: Fixtures = toml::from_str(text).map_err(|e| HarnessError::Fixture(e.to_string()))?;
        // surface malformed polynomials at load time rather than mid-check
        for t in &fixtures.tau {
            parse_poly(&t.poly)?;
        }
        for a in &fixtures.a {
            parse_poly(&a.poly)?;
        }
        parse_poly(&fixtures.tau2_printed.poly)?;
        for q in &fixtures.q {
            for term in &q.terms {
                parse_rational(&term.coeff)?;
            }
        }
        Ok(fixtures)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `(n, τ_n)` in ascending `n`.
    pub fn tau_polys(&self) -> Vec<(i64, RatPoly)> {
        let mut out: Vec<_> = self
            .tau
            .iter()
            .map(|t| (t.n, parse_poly(&t.poly).expect("validated on load")))
            .collect();
        out.sort_by_key(|(n, _)| *n);
        out
    }

    pub fn tau2_printed_poly(&self) -> RatPoly {
        parse_poly(&self.tau2_printed.poly).expect("validated on load")
    }

    pub fn a_polys(&self) -> Vec<(usize, RatPoly)> {
        let mut out: Vec<_> = self
            .a
            .iter()
            .map(|a| (a.k, parse_poly(&a.poly).expect("validated on load")))
            .collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }

    /// `Q_n(s)` with `y_j` replaced by `values(j)`.
    pub fn q_substituted(&self, n: usize, values: impl Fn(usize) -> BigRational) -> Option<RatPoly> {
        let entry = self.q.iter().find(|q| q.n == n)?;
        let mut poly = RatPoly::zero();
        for term in &entry.terms {
            let mut c = parse_rational(&term.coeff).expect("validated on load");
            for &j in &term.y {
                c *= values(j);
            }
            poly += RatPoly::monomial(c, term.s);
        }
        Some(poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn builtin_fixtures_load() {
        let f = Fixtures::builtin();
        let taus = f.tau_polys();
        assert_eq!(taus.first().unwrap().0, -2);
        assert_eq!(taus.last().unwrap().0, 5);
        assert_eq!(f.a_polys().len(), 2);
        assert!(f.constants.euler_gamma.starts_with("0.5772156649"));
    }

    #[test]
    fn printed_tau2_differs_in_one_coefficient() {
        let f = Fixtures::builtin();
        let corrected = &f.tau_polys()[4].1;
        let diff = corrected - &f.tau2_printed_poly();
        assert_eq!(diff, RatPoly::monomial(rat(-6, 810), 2));
    }

    #[test]
    fn q_substitution() {
        let f = Fixtures::builtin();
        let q1 = f.q_substituted(1, |_| rat(1, 6)).unwrap();
        assert_eq!(q1, RatPoly::monomial(rat(-1, 6), 2));
        assert!(f.q_substituted(9, |_| rat(1, 1)).is_none());
    }

    #[test]
    fn malformed_fixtures_are_rejected() {
        let bad = BUILTIN.replace("8/405 - 7/810*L^2", "8/405 - 7/810*Q^2");
        assert!(matches!(Fixtures::from_toml(&bad), Err(HarnessError::Fixture(_))));
        assert!(Fixtures::from_toml("constants = 3").is_err());
    }
}
