//! Scalar layer: a small `Real` abstraction with three precision tiers
//! (f64, double-double, quad-double) and complex helpers on top of it.

mod bernoulli;
mod cx;
mod dd;
mod decimal;
mod funcs;
mod gamma;
mod gauss;
mod qd;

use std::fmt;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_traits::Num;

pub use bernoulli::bernoulli_numbers;
pub use cx::*;
pub use dd::Dd;
pub use gamma::{gamma_complex, ln_gamma_complex};
pub use gauss::GaussRule;
pub use qd::Qd;

/// Real scalar with a fixed mantissa width.
///
/// Implementations must be deterministic: the same sequence of operations
/// gives the same bits on every run.
pub trait Real:
    Copy
    + Send
    + Sync
    + 'static
    + fmt::Debug
    + Default
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Mantissa bits carried by the type.
    const PREC_BITS: u32;
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Multiply by 2^e exactly.
    fn mul_pow2(self, e: i32) -> Self;
    fn floor(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn expm1(self) -> Self;
    fn pi() -> Self;
    fn ln2() -> Self;
    /// Exact component decomposition (leading double first).
    fn parts(self) -> Vec<f64>;
    fn from_parts(parts: &[f64]) -> Self;

    fn from_i64(n: i64) -> Self {
        let hi = (n >> 26) << 26;
        Self::from_f64(hi as f64) + Self::from_f64((n - hi) as f64)
    }
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }
    fn epsilon() -> Self {
        Self::one().mul_pow2(-(Self::PREC_BITS as i32))
    }
    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn to_sci_string(self) -> String {
        decimal::format_sci(self, decimal::digits_for(Self::PREC_BITS))
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        decimal::parse(s)
    }
}

impl Real for f64 {
    const PREC_BITS: u32 = 53;
    const NAME: &'static str = "f64";

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn mul_pow2(self, e: i32) -> Self {
        self * 2f64.powi(e)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn expm1(self) -> Self {
        f64::exp_m1(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ln2() -> Self {
        std::f64::consts::LN_2
    }
    fn parts(self) -> Vec<f64> {
        vec![self]
    }
    fn from_parts(parts: &[f64]) -> Self {
        parts.iter().rev().sum()
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn round(self) -> Self {
        f64::floor(self + 0.5)
    }
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
}

/// Precision tier chosen for a requested mantissa width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    F64,
    Dd,
    Qd,
}

impl Tier {
    /// Smallest tier carrying at least `bits` mantissa bits.
    pub fn for_bits(bits: u32) -> Option<Tier> {
        match bits {
            0..=53 => Some(Tier::F64),
            54..=106 => Some(Tier::Dd),
            107..=212 => Some(Tier::Qd),
            _ => None,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Tier::F64 => f64::PREC_BITS,
            Tier::Dd => Dd::PREC_BITS,
            Tier::Qd => Qd::PREC_BITS,
        }
    }

    pub fn next(self) -> Option<Tier> {
        match self {
            Tier::F64 => Some(Tier::Dd),
            Tier::Dd => Some(Tier::Qd),
            Tier::Qd => None,
        }
    }
}

/// Exact conversion of an integer-valued big number into `R` (up to the
/// precision of `R`).
pub fn real_from_bigint<R: Real>(n: &num_bigint::BigInt) -> R {
    use num_traits::{FromPrimitive, ToPrimitive, Zero};
    let mut rest = n.clone();
    let mut acc = R::zero();
    for _ in 0..6 {
        if rest.is_zero() {
            break;
        }
        let approx = rest.to_f64().unwrap_or(f64::INFINITY);
        if !approx.is_finite() {
            return R::from_f64(approx);
        }
        acc += R::from_f64(approx);
        rest -= num_bigint::BigInt::from_f64(approx).expect("finite integer double");
    }
    acc
}

pub fn real_from_ratio<R: Real>(q: &num_rational::BigRational) -> R {
    real_from_bigint::<R>(q.numer()) / real_from_bigint::<R>(q.denom())
}
