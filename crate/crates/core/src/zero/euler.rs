//! Euler–Mascheroni constant by the Brent–McMillan series in fixed-point
//! integer arithmetic.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Series parameter; the truncation error is about `π e^{-4N}`.
const N_LOG2: u32 = 5;

/// `ln 2 · 2^bits`, from `ln 2 = Σ_{k≥1} 1/(k 2^k)`.
fn ln2_fixed(bits: u32) -> BigInt {
    let one = BigInt::from(1) << bits;
    let mut sum = BigInt::zero();
    for k in 1..=bits + 8 {
        sum += (&one >> k) / BigInt::from(k);
    }
    sum
}

/// `γ · 2^bits`, accurate to a few units in the last place for
/// `bits ≤ 160` (beyond that the fixed `N = 32` truncation dominates).
pub fn euler_gamma_fixed(bits: u32) -> BigInt {
    let work = bits + 32;
    let n = 1u64 << N_LOG2;
    let n2 = BigInt::from(n * n);
    let one = BigInt::from(1) << work;

    // A_0 = −ln N, B_0 = 1; B_k = B_{k−1} N²/k², A_k = (A_{k−1} N²/k + B_k)/k
    let mut a = -(ln2_fixed(work) * BigInt::from(N_LOG2));
    let mut b = one;
    let mut u = a.clone();
    let mut v = b.clone();
    let mut k = 1u64;
    loop {
        let kk = BigInt::from(k);
        b = &b * &n2 / (&kk * &kk);
        a = (&a * &n2 / &kk + &b) / &kk;
        u += &a;
        v += &b;
        if k > n && b.is_zero() && a.is_zero() {
            break;
        }
        k += 1;
    }
    ((u << work) / v) >> 32u32
}

/// γ rounded to double precision (computed once).
pub fn euler_gamma() -> f64 {
    static GAMMA: OnceLock<f64> = OnceLock::new();
    *GAMMA.get_or_init(|| {
        let fixed = euler_gamma_fixed(96);
        // top 64 bits carry far more than 53 significant bits
        let top = (fixed >> 32u32).to_u64().expect("γ < 1");
        top as f64 / 2f64.powi(64)
    })
}

/// Decimal expansion of γ with `digits` digits after the point (truncated).
pub fn euler_gamma_decimal(digits: usize) -> String {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16;
    let fixed = euler_gamma_fixed(bits);
    let scaled = (fixed * BigInt::from(10).pow(digits as u32)) >> bits;
    format!("0.{:0>width$}", scaled.to_string(), width = digits)
}
