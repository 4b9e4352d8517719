//! Exact rational scalars.
//!
//! Every utility, probability and value in this crate is a [`Rational`]:
//! an arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. Nothing is ever rounded.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use num_rational::BigRational as Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// `numer / denom` as an exact rational. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p"`, `"-p"` or `"p/q"`. Decimal points and exponents are rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let invalid = || ParseRationalError::Invalid(trimmed.to_string());
    let (numer, denom) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let is_integer = |s: &str| {
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !is_integer(numer) || !is_integer(denom) {
        return Err(invalid());
    }
    let numer = BigInt::from_str(numer).map_err(|_| invalid())?;
    let denom = BigInt::from_str(denom).map_err(|_| invalid())?;
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(trimmed.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

/// Renders as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Lossy conversion for display columns only.
pub fn to_f64(value: &Rational) -> f64 {
    let numer: f64 = value.numer().to_string().parse().unwrap_or(f64::NAN);
    let denom: f64 = value.denom().to_string().parse().unwrap_or(f64::NAN);
    numer / denom
}

pub(crate) fn dot(lhs: &[Rational], rhs: &[Rational]) -> Rational {
    lhs.iter()
        .zip(rhs)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

pub(crate) fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}
