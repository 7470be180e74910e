//! Elements of the differential module ℚ[L]·{1, E, Φ, G}.
//!
//! `E = exp(-L²/2)`, `Φ = ∫₀^L exp(-s²/2) ds` and `G = √(π/2)`. The span is
//! closed under `d/dL`, which is all the large-shape coefficient recursion
//! needs. Products of two basis elements never occur, so there is no
//! `SymExpr * SymExpr`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::{BigRational, ExactError, RatPoly};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymExpr {
    plain: RatPoly,
    e: RatPoly,
    phi: RatPoly,
    g: RatPoly,
}

impl SymExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_parts(plain: RatPoly, e: RatPoly, phi: RatPoly, g: RatPoly) -> Self {
        Self { plain, e, phi, g }
    }

    pub fn plain(p: RatPoly) -> Self {
        Self { plain: p, ..Self::default() }
    }

    /// `P(L)·E`
    pub fn e_times(p: RatPoly) -> Self {
        Self { e: p, ..Self::default() }
    }

    /// `P(L)·Φ`
    pub fn phi_times(p: RatPoly) -> Self {
        Self { phi: p, ..Self::default() }
    }

    /// `P(L)·G`
    pub fn g_times(p: RatPoly) -> Self {
        Self { g: p, ..Self::default() }
    }

    pub fn one() -> Self {
        Self::plain(RatPoly::one())
    }

    pub fn basis_e() -> Self {
        Self::e_times(RatPoly::one())
    }

    pub fn basis_phi() -> Self {
        Self::phi_times(RatPoly::one())
    }

    pub fn basis_g() -> Self {
        Self::g_times(RatPoly::one())
    }

    pub fn plain_part(&self) -> &RatPoly {
        &self.plain
    }

    pub fn e_part(&self) -> &RatPoly {
        &self.e
    }

    pub fn phi_part(&self) -> &RatPoly {
        &self.phi
    }

    pub fn g_part(&self) -> &RatPoly {
        &self.g
    }

    pub fn is_zero(&self) -> bool {
        self.plain.is_zero() && self.e.is_zero() && self.phi.is_zero() && self.g.is_zero()
    }

    /// Multiplies every component by the polynomial `c`.
    pub fn scale(&self, c: &RatPoly) -> Self {
        Self {
            plain: &self.plain * c,
            e: &self.e * c,
            phi: &self.phi * c,
            g: &self.g * c,
        }
    }

    pub fn scale_rational(&self, c: &BigRational) -> Self {
        Self {
            plain: self.plain.scale(c),
            e: self.e.scale(c),
            phi: self.phi.scale(c),
            g: self.g.scale(c),
        }
    }

    /// `d/dL`, using `E' = -L·E`, `Φ' = E` and `G' = 0`.
    pub fn diff(&self) -> Self {
        let l = RatPoly::var();
        let e = &(self.e.derivative() - &l * &self.e) + &self.phi;
        Self {
            plain: self.plain.derivative(),
            e,
            phi: self.phi.derivative(),
            g: self.g.derivative(),
        }
    }

    /// Returns the `E` coefficient, provided every other component vanishes
    /// identically.
    pub fn div_by_e(&self) -> Result<RatPoly, ExactError> {
        if self.plain.is_zero() && self.phi.is_zero() && self.g.is_zero() {
            Ok(self.e.clone())
        } else {
            Err(ExactError::NonVanishingResidual {
                plain: self.plain.to_string(),
                phi: self.phi.to_string(),
                g: self.g.to_string(),
            })
        }
    }

    /// Numeric value at `l`, with `E`, `Φ`, `G` evaluated in double precision.
    pub fn eval_f64(&self, l: f64) -> f64 {
        let e = (-0.5 * l * l).exp();
        let phi = std::f64::consts::FRAC_PI_2.sqrt() * libm::erf(l / std::f64::consts::SQRT_2);
        let g = std::f64::consts::FRAC_PI_2.sqrt();
        self.plain.eval_f64(l) + e * self.e.eval_f64(l) + phi * self.phi.eval_f64(l) + g * self.g.eval_f64(l)
    }
}

impl Add<&SymExpr> for &SymExpr {
    type Output = SymExpr;

    fn add(self, rhs: &SymExpr) -> SymExpr {
        SymExpr {
            plain: &self.plain + &rhs.plain,
            e: &self.e + &rhs.e,
            phi: &self.phi + &rhs.phi,
            g: &self.g + &rhs.g,
        }
    }
}

impl Sub<&SymExpr> for &SymExpr {
    type Output = SymExpr;

    fn sub(self, rhs: &SymExpr) -> SymExpr {
        SymExpr {
            plain: &self.plain - &rhs.plain,
            e: &self.e - &rhs.e,
            phi: &self.phi - &rhs.phi,
            g: &self.g - &rhs.g,
        }
    }
}

impl Neg for &SymExpr {
    type Output = SymExpr;

    fn neg(self) -> SymExpr {
        SymExpr {
            plain: -&self.plain,
            e: -&self.e,
            phi: -&self.phi,
            g: -&self.g,
        }
    }
}

impl Add for SymExpr {
    type Output = SymExpr;

    fn add(self, rhs: SymExpr) -> SymExpr {
        &self + &rhs
    }
}

impl Sub for SymExpr {
    type Output = SymExpr;

    fn sub(self, rhs: SymExpr) -> SymExpr {
        &self - &rhs
    }
}

impl Neg for SymExpr {
    type Output = SymExpr;

    fn neg(self) -> SymExpr {
        -&self
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [
            (&self.plain, ""),
            (&self.e, "E"),
            (&self.phi, "Phi"),
            (&self.g, "G"),
        ];
        let mut wrote = false;
        for (poly, name) in parts {
            if poly.is_zero() {
                continue;
            }
            if wrote {
                f.write_str(" + ")?;
            }
            wrote = true;
            if name.is_empty() {
                write!(f, "({poly})")?;
            } else {
                write!(f, "({poly})*{name}")?;
            }
        }
        if !wrote {
            f.write_str("0")?;
        }
        Ok(())
    }
}
