//! Scalar abstraction shared by every module.
//!
//! All geometry in this crate is written once against [`Scalar`] and
//! instantiated either with exact rationals ([`Rational`]) or with binary
//! floating point (`f64`, `f32`). Mixing the two inside one computation is
//! rejected by the type checker.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational number.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse `{input}` as a scalar")]
pub struct ParseScalarError {
    pub input: String,
}

pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// True when arithmetic never rounds.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_count(v: usize) -> Self {
        Self::from_ratio(v as i64, 1)
    }

    fn to_f64(&self) -> f64;

    /// Zero test used when pruning and comparing. Exact types ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Square root when it exists in this field.
    fn try_sqrt(&self) -> Option<Self>;

    /// Parses `"3"`, `"-2/5"` or `"0.125"`.
    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError>;

    /// Integer power, `exp` may be negative for nonzero bases.
    fn powi(&self, exp: i32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc * self.clone();
        }
        if exp < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }
}

/// Sign helper: `(-1)^k` as a scalar.
pub fn sign_pow<T: Scalar>(k: usize) -> T {
    if k.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

pub fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, j| acc * T::from_count(j))
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn try_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let (n, d) = (self.numer(), self.denom());
        let (rn, rd) = (n.sqrt(), d.sqrt());
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(BigRational::new(rn, rd))
        } else {
            None
        }
    }

    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        let err = || ParseScalarError { input: s.to_string() };
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| err())?;
            let den: BigInt = den.trim().parse().map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            return Ok(BigRational::new(num, den));
        }
        if let Some((int, frac)) = t.split_once('.') {
            let negative = int.trim_start().starts_with('-');
            let digits = frac.len() as u32;
            if !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            let int: BigInt = if int.is_empty() || int == "-" || int == "+" {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| err())?
            };
            let frac: BigInt = if frac.is_empty() {
                BigInt::zero()
            } else {
                frac.parse().map_err(|_| err())?
            };
            let scale = BigInt::from(10u32).pow(digits);
            let mag = int.abs() * &scale + frac;
            let num = if negative { -mag } else { mag };
            return Ok(BigRational::new(num, scale));
        }
        let num: BigInt = t.parse().map_err(|_| err())?;
        Ok(BigRational::from_integer(num))
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn is_negligible(&self, tol: f64) -> bool {
                (*self as f64).abs() <= tol
            }

            fn try_sqrt(&self) -> Option<Self> {
                if *self < 0.0 {
                    None
                } else {
                    Some(self.sqrt())
                }
            }

            fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
                let t = s.trim();
                if t.contains('/') {
                    let r = Rational::parse_scalar(t)?;
                    return Ok(Scalar::to_f64(&r) as $t);
                }
                t.parse::<$t>().map_err(|_| ParseScalarError { input: s.to_string() })
            }
        }
    };
}

impl_float_scalar!(f64);
impl_float_scalar!(f32);

/// Converts between scalar realizations through `f64` (floats) or exactly
/// (rational to rational).
pub fn rational_to<T: Scalar>(r: &Rational) -> T {
    if T::EXACT {
        // Only Rational is exact; round-trip through its string form.
        T::parse_scalar(&r.to_string()).expect("rational display is parseable")
    } else {
        T::from_f64(Scalar::to_f64(r)).expect("finite value")
    }
}

/// `a/b` as an exact rational.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(Rational::parse_scalar("-2/4").unwrap(), q(-1, 2));
        assert_eq!(Rational::parse_scalar("0.125").unwrap(), q(1, 8));
        assert_eq!(Rational::parse_scalar("-1.5").unwrap(), q(-3, 2));
        assert_eq!(Rational::parse_scalar("7").unwrap(), q(7, 1));
        assert!(Rational::parse_scalar("1/0").is_err());
        assert!(Rational::parse_scalar("abc").is_err());
        assert_eq!(f64::parse_scalar("1/4").unwrap(), 0.25);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(q(9, 4).try_sqrt(), Some(q(3, 2)));
        assert_eq!(q(2, 1).try_sqrt(), None);
        assert_eq!(q(-1, 1).try_sqrt(), None);
        assert_eq!(4.0f64.try_sqrt(), Some(2.0));
    }

    #[test]
    fn powers_and_factorials() {
        assert_eq!(q(2, 3).powi(-2), q(9, 4));
        assert_eq!(factorial::<Rational>(5), q(120, 1));
        assert_eq!(sign_pow::<f64>(3), -1.0);
        assert_eq!(rational_to::<f64>(&q(1, 4)), 0.25);
        assert_eq!(rational_to::<Rational>(&q(-5, 3)), q(-5, 3));
    }
}
