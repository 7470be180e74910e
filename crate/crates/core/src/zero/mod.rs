//! Small-shape behaviour of the quantile.
//!
//! `m_p(x) = e^{(log p)/x} u_p(x)` with `u_p` smooth at `0`,
//! `u_p(0) = e^{-γ}`, `u_p'(0) = e^{-γ} s₁`, `u_p''(0) = e^{-γ}(s₂ + s₁² + 2γ s₁)`.
//! Only orders up to 2 have closed forms.

mod euler;

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{binomial, rational_to_f64, RatPoly};
use crate::oracle::{self, OracleError};
use crate::quad::{self, QuadError};

pub use euler::{euler_gamma, euler_gamma_decimal, euler_gamma_fixed};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroError {
    #[error("s_{q} tolerance {requested:e} not met (estimate {achieved:e})")]
    ToleranceNotMet { q: u32, requested: f64, achieved: f64 },
    #[error("truncated series is {value} <= 0 at x = {x}; x is too large for the expansion")]
    NonPositiveArgument { x: f64, value: f64 },
    #[error("no closed form for z_{{{k},{n}}}")]
    UnsupportedIndex { n: usize, k: i64 },
    #[error("order {0} unsupported; closed forms exist for orders 0, 1, 2")]
    InvalidOrder(usize),
    #[error("argument out of domain: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// A value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integrate over `[a, b]` split into pieces of geometrically growing width,
/// sharing the tolerance evenly.
fn integrate_pieces<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate, QuadError> {
    let mut edges = vec![a];
    let mut width = 1.0;
    let mut edge = a;
    while edge < b {
        edge = (edge + width).min(b);
        edges.push(edge);
        width *= 1.5;
    }
    let share = tol / (edges.len() - 1) as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    for w in edges.windows(2) {
        let r = quad::integrate(f, w[0], w[1], share)?;
        value += r.value;
        error += r.abs_error;
    }
    Ok(Estimate { value, error })
}

/// `s_q = ∫₀^{e^{-γ}} g(s)(log s)^q ds + ∫_{e^{-γ}}^∞ h(s)(log s)^q ds`,
/// `g(s) = (e^{-s} − 1)/s`, `h(s) = e^{-s}/s`, to absolute error `tol`.
///
/// The first piece becomes `∫_γ^∞ expm1(−e^{−t}) (−t)^q dt` under `s = e^{−t}`;
/// both are cut where the integrand drops below `tol/10`, and the cut tails
/// (`≤ 2 e^{−T} T^q` and `≤ 2 e^{−T} (log T)^q / T` respectively) are added
/// to the reported error.
pub fn compute_s(q: u32, tol: f64) -> Result<Estimate, ZeroError> {
    if q < 1 {
        return Err(ZeroError::Domain("s_q is defined for q >= 1"));
    }
    if !(tol > 0.0) {
        return Err(ZeroError::Domain("tolerance must be positive"));
    }
    let gamma = euler_gamma();
    let qi = q as i32;

    let lower = move |t: f64| libm::expm1(-(-t).exp()) * (-t).powi(qi);
    let mut t1 = (2.0 * q as f64).max(gamma + 1.0);
    while 2.0 * (-t1).exp() * t1.powi(qi) >= tol / 10.0 {
        t1 += 1.0;
    }
    let tail1 = 2.0 * (-t1).exp() * t1.powi(qi);

    let upper = move |s: f64| (-s).exp() * s.ln().powi(qi) / s;
    let mut t2 = 10.0f64;
    while 2.0 * (-t2).exp() * t2.ln().powi(qi) / t2 >= tol / 10.0 {
        t2 += 1.0;
    }
    let tail2 = 2.0 * (-t2).exp() * t2.ln().powi(qi) / t2;

    let budget = 0.4 * tol;
    let first = integrate_pieces(lower, gamma, t1, budget).map_err(|e| lift(q, tol, e))?;
    let second = integrate_pieces(upper, (-gamma).exp(), t2, budget).map_err(|e| lift(q, tol, e))?;
    let error = first.error + second.error + tail1 + tail2;
    if error > tol {
        return Err(ZeroError::ToleranceNotMet { q, requested: tol, achieved: error });
    }
    Ok(Estimate { value: first.value + second.value, error })
}

fn lift(q: u32, tol: f64, e: QuadError) -> ZeroError {
    match e {
        QuadError::ToleranceNotMet { achieved, .. } => ZeroError::ToleranceNotMet { q, requested: tol, achieved },
        other => ZeroError::Quadrature(other),
    }
}

/// `γ`, `s₁`, `s₂` and the first three Taylor data of `u_p` at `0`
/// (independent of `p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallXCoeffs {
    pub gamma: f64,
    pub u0: f64,
    pub s1: f64,
    pub s2: f64,
    pub u1: f64,
    pub u2: f64,
    pub s1_error: f64,
    pub s2_error: f64,
}

pub fn u_derivatives(tol: f64) -> Result<SmallXCoeffs, ZeroError> {
    let gamma = euler_gamma();
    let s1 = compute_s(1, tol)?;
    let s2 = compute_s(2, tol)?;
    let u0 = (-gamma).exp();
    Ok(SmallXCoeffs {
        gamma,
        u0,
        s1: s1.value,
        s2: s2.value,
        u1: u0 * s1.value,
        u2: u0 * (s2.value + s1.value * s1.value + 2.0 * gamma * s1.value),
        s1_error: s1.error,
        s2_error: s2.error,
    })
}

/// Coefficients at `tol = 1e-13`, computed once.
pub fn default_coeffs() -> &'static SmallXCoeffs {
    static COEFFS: OnceLock<SmallXCoeffs> = OnceLock::new();
    COEFFS.get_or_init(|| u_derivatives(1e-13).expect("s_q quadrature converges at 1e-13"))
}

impl SmallXCoeffs {
    /// `u_p^{(k)}(0)` for `k ≤ 2`.
    pub fn u_derivative(&self, k: usize) -> Option<f64> {
        match k {
            0 => Some(self.u0),
            1 => Some(self.u1),
            2 => Some(self.u2),
            _ => None,
        }
    }

    /// `(log p)/x + log(u₀ + u₁x + u₂x²/2)`, truncated after `order`.
    pub fn eval_log(&self, x: f64, p: f64, order: usize) -> Result<f64, ZeroError> {
        if order > 2 {
            return Err(ZeroError::InvalidOrder(order));
        }
        if !(x > 0.0) {
            return Err(ZeroError::Domain("x must be positive"));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(ZeroError::Domain("p must lie in (0, 1)"));
        }
        let terms = [self.u0, self.u1 * x, 0.5 * self.u2 * x * x];
        let poly: f64 = terms[..=order].iter().sum();
        if poly <= 0.0 {
            return Err(ZeroError::NonPositiveArgument { x, value: poly });
        }
        Ok(p.ln() / x + poly.ln())
    }
}

/// [`SmallXCoeffs::eval_log`] with [`default_coeffs`].
pub fn eval_small_x_log(x: f64, p: f64, order: usize) -> Result<f64, ZeroError> {
    default_coeffs().eval_log(x, p, order)
}

/// `p_n` with `∂_x^n e^{−1/x} = p_n(1/x) e^{−1/x}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnPolynomial {
    pub n: usize,
    pub poly: RatPoly,
}

impl PnPolynomial {
    /// `a_{k,n}`, the coefficient of `t^k`.
    pub fn coeff(&self, k: usize) -> BigInt {
        let c = self.poly.coeff(k);
        assert!(c.is_integer(), "p_n has integer coefficients");
        c.to_integer()
    }
}

/// `p_0 = 1`, `p_1 = t²`, `p_{n+1} = t²(p_n − p_n')`.
pub fn p_polynomial(n: usize) -> PnPolynomial {
    let t2 = RatPoly::monomial(crate::exactalg::rat(1, 1), 2);
    let mut poly = RatPoly::one();
    for _ in 0..n {
        poly = &t2 * &(&poly - &poly.derivative());
    }
    PnPolynomial { n, poly }
}

fn check_p(p: f64) -> Result<(), ZeroError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(ZeroError::Domain("p must lie in (0, 1)"))
    }
}

/// Closed forms for `z_{2n,n}`, `z_{2n−1,n}`, `z_{2n−2,n}`, the coefficients
/// of `x^{−k}` in `e^{−(log p)/x} m_p^{(n)}(x)`. The third is the printed
/// closed form taken as is; [`z_coefficient_by_triples`] sums the same
/// coefficient directly and disagrees with it.
pub fn z_coefficient(n: usize, k: i64, p: f64, c: &SmallXCoeffs) -> Result<f64, ZeroError> {
    check_p(p)?;
    let nf = n as f64;
    let lp = p.ln();
    let mlp = -lp;
    let e = c.u0;
    let n2 = 2 * n as i64;
    if k == n2 {
        Ok(e * mlp.powi(n as i32))
    } else if k == n2 - 1 && n >= 1 {
        Ok(e * mlp.powi(n as i32 - 1) * (-c.s1 * lp - nf * (nf - 1.0)))
    } else if k == n2 - 2 && n >= 1 {
        let bracket = 0.5 * lp * lp * (c.s2 + c.s1 * c.s1 + 2.0 * c.gamma * c.s1)
            + nf * (nf - 1.0) * c.s1 * lp
            + nf * (nf - 1.0).powi(2) * (nf - 2.0) / 2.0
            - nf * nf * (nf - 1.0).powi(2) * (nf - 2.0) / 2.0 * c.s1 * lp;
        Ok(e * mlp.powi(n as i32 - 2) * bracket)
    } else {
        Err(ZeroError::UnsupportedIndex { n, k })
    }
}

/// `z_{k,n}` from the Leibniz expansion
/// `Σ_{k'} C(n,k') a_{l,k'} (−log p)^{l−k'} u^{(n−k'+j)}(0)/j!` over
/// `l − j = k`. Needs `u` derivatives only up to order 2, so it serves
/// `k ≥ 2n − 2`.
pub fn z_coefficient_by_triples(n: usize, k: i64, p: f64, c: &SmallXCoeffs) -> Result<f64, ZeroError> {
    check_p(p)?;
    if k > 2 * n as i64 || k < 0 {
        return Ok(0.0);
    }
    let mlp = -p.ln();
    let mut total = 0.0;
    for kp in 0..=n {
        let pk = p_polynomial(kp);
        let weight = binomial(n, kp).to_f64().expect("small binomial");
        for l in pk.poly.support() {
            let j = l as i64 - k;
            if j < 0 {
                continue;
            }
            let order = n - kp + j as usize;
            let u = c.u_derivative(order).ok_or(ZeroError::UnsupportedIndex { n, k })?;
            let a = rational_to_f64(&pk.poly.coeff(l));
            let fact: f64 = (1..=j).map(|i| i as f64).product();
            total += weight * a * mlp.powi(l as i32 - kp as i32) * u / fact;
        }
    }
    Ok(total)
}

/// `log |·|` and sign of a quantity too small for `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogMagnitude {
    pub log_abs: f64,
    pub sign: i8,
}

/// Leading behaviour `m_p^{(n)}(x) ~ (−log p)^n x^{−2n} e^{−γ} e^{(log p)/x}`.
pub fn m_derivative_leading(n: usize, x: f64, p: f64) -> Result<LogMagnitude, ZeroError> {
    check_p(p)?;
    if !(x > 0.0) {
        return Err(ZeroError::Domain("x must be positive"));
    }
    let nf = n as f64;
    let log_abs = nf * (-p.ln()).ln() - 2.0 * nf * x.ln() - euler_gamma() + p.ln() / x;
    Ok(LogMagnitude { log_abs, sign: 1 })
}

/// `log m_p(x)` from the log-domain oracle.
pub fn log_quantile(x: f64, p: f64) -> Result<f64, ZeroError> {
    Ok(oracle::quantile_log(x, p, 1e-14)?.value)
}

/// `u_p(x) = e^{−(log p)/x} m_p(x)` from the oracle.
pub fn u_from_oracle(x: f64, p: f64) -> Result<f64, ZeroError> {
    Ok((log_quantile(x, p)? - p.ln() / x).exp())
}

/// Five-point central differences `(f', f'')` at `x` with step `h`.
pub fn central_derivatives<F: Fn(f64) -> Result<f64, ZeroError>>(
    f: F,
    x: f64,
    h: f64,
) -> Result<(f64, f64), ZeroError> {
    let (m2, m1, z, p1, p2) = (f(x - 2.0 * h)?, f(x - h)?, f(x)?, f(x + h)?, f(x + 2.0 * h)?);
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
    Ok((d1, d2))
}

/// `u_p'(x)` by central differences of the oracle.
pub fn u_prime_from_oracle(x: f64, p: f64) -> Result<f64, ZeroError> {
    let h = 1e-3 * x;
    Ok(central_derivatives(|t| u_from_oracle(t, p), x, h)?.0)
}

/// `m_p'(x)` by central differences of `w = log m_p`: `m' = e^w w'`.
/// Returned in log form since `m_p` underflows at small `x`.
pub fn m_prime_from_oracle(x: f64, p: f64) -> Result<LogMagnitude, ZeroError> {
    let h = 1e-3 * x;
    let w = log_quantile(x, p)?;
    let (dw, _) = central_derivatives(|t| log_quantile(t, p), x, h)?;
    Ok(LogMagnitude { log_abs: w + dw.abs().ln(), sign: if dw < 0.0 { -1 } else { 1 } })
}

/// `e^{−(log p)/x} m_p^{(n)}(x)` for `n ∈ {1, 2}` from the oracle, via
/// `m' = m w'`, `m'' = m (w'' + w'^2)`.
pub fn scaled_m_derivative(n: usize, x: f64, p: f64) -> Result<f64, ZeroError> {
    let h = 2e-3 * x;
    let u = u_from_oracle(x, p)?;
    let (dw, d2w) = central_derivatives(|t| log_quantile(t, p), x, h)?;
    match n {
        1 => Ok(u * dw),
        2 => Ok(u * (d2w + dw * dw)),
        _ => Err(ZeroError::Domain("numeric derivative estimates cover n = 1, 2")),
    }
}

/// Numeric `z_{2n−2,n}` for `n ∈ {1, 2}`: subtract the two leading closed
/// forms from the oracle estimate, rescale by `x^{2n−2}` and Richardson
/// extrapolate over `x, x/2, x/4` (the remainder is a power series in `x`).
pub fn z_estimate(n: usize, p: f64, x: f64, c: &SmallXCoeffs) -> Result<f64, ZeroError> {
    let k = 2 * n as i64;
    let z_top = z_coefficient(n, k, p, c)?;
    let z_next = z_coefficient(n, k - 1, p, c)?;
    let rescaled = |x: f64| -> Result<f64, ZeroError> {
        let f = scaled_m_derivative(n, x, p)?;
        let rest = f - z_top / x.powi(k as i32) - z_next / x.powi(k as i32 - 1);
        Ok(rest * x.powi(k as i32 - 2))
    };
    let (r0, r1, r2) = (rescaled(x)?, rescaled(0.5 * x)?, rescaled(0.25 * x)?);
    let (e1, e2) = (2.0 * r1 - r0, 2.0 * r2 - r1);
    Ok((4.0 * e2 - e1) / 3.0)
}
