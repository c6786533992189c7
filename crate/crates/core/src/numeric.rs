//! Scalar abstraction over the two numeric modes: exact rationals and
//! binary floating point with a global absolute tolerance of 1e-9.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumberError {
    #[error("cannot parse number from {0:?}")]
    Parse(String),
    #[error("number is not finite: {0}")]
    NotFinite(String),
}

/// Arithmetic carrier for every quantity in the library.
///
/// Implemented by `BigRational` (exact mode, zero tolerance) and `f64`
/// (float mode, default tolerance 1e-9). Values are always finite; the
/// parsing entry points reject NaN and infinities.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Zero
    + One
    + Sum<Self>
    + 'static
{
    /// True when arithmetic is exact and comparisons carry no tolerance.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Parses a decimal string like `-12`, `0.05`, `1e-9`, or a rational
    /// `p/q`. Exact in rational mode.
    fn parse_number(s: &str) -> Result<Self, NumberError>;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    /// Global absolute tolerance: zero in exact mode, 1e-9 in float mode.
    fn default_tol() -> Self;

    /// Total order; inputs are finite by construction.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Lossless textual form (`p/q` for rationals, shortest round-trip
    /// representation for floats).
    fn render(&self) -> String {
        format!("{self}")
    }

    fn is_nonneg(&self) -> bool {
        *self >= Self::zero()
    }
}

/// Splits a decimal string into (sign, integer digits, fraction digits, exponent).
fn split_decimal(s: &str) -> Option<(bool, &str, &str, i32)> {
    let s = s.trim();
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match rest.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = rest[pos + 1..].parse().ok()?;
            (&rest[..pos], e)
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((neg, int_part, frac_part, exp))
}

fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    let (neg, int_part, frac_part, exp) = split_decimal(s)?;
    let digits: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = frac_part.len() as i32 - exp;
    let ten = BigInt::from(10);
    let rational = if scale >= 0 {
        BigRational::new(num, ten.pow(scale as u32))
    } else {
        BigRational::from_integer(num * ten.pow((-scale) as u32))
    };
    Some(rational)
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse_number(s: &str) -> Result<Self, NumberError> {
        if let Some((n, d)) = s.split_once('/') {
            let num: BigInt = n.trim().parse().map_err(|_| NumberError::Parse(s.into()))?;
            let den: BigInt = d.trim().parse().map_err(|_| NumberError::Parse(s.into()))?;
            if den.is_zero() {
                return Err(NumberError::Parse(s.into()));
            }
            return Ok(BigRational::new(num, den));
        }
        parse_decimal_rational(s).ok_or_else(|| NumberError::Parse(s.into()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn default_tol() -> Self {
        BigRational::zero()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        Ord::cmp(self, other)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse_number(s: &str) -> Result<Self, NumberError> {
        let v = if let Some((n, d)) = s.split_once('/') {
            let num: f64 = n.trim().parse().map_err(|_| NumberError::Parse(s.into()))?;
            let den: f64 = d.trim().parse().map_err(|_| NumberError::Parse(s.into()))?;
            num / den
        } else {
            s.trim().parse().map_err(|_| NumberError::Parse(s.into()))?
        };
        if !v.is_finite() {
            return Err(NumberError::NotFinite(s.into()));
        }
        Ok(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn default_tol() -> Self {
        1e-9
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

pub fn min2<T: Scalar>(a: T, b: T) -> T {
    if a.total_cmp(&b) == Ordering::Greater {
        b
    } else {
        a
    }
}

pub fn max2<T: Scalar>(a: T, b: T) -> T {
    if a.total_cmp(&b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Positive part `(v)^+`.
pub fn pos_part<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

/// Clamps into `[0, 1]`.
pub fn clamp01<T: Scalar>(v: T) -> T {
    min2(max2(v, T::zero()), T::one())
}
