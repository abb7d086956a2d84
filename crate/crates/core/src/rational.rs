//! Exact rational scalars and their canonical text form.
//!
//! Every quantity in this crate is a `Rational`; no floating point enters
//! any order-theoretic predicate. The text form is `p/q` in lowest terms
//! with a positive denominator, or just `p` when the denominator is 1.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand constructor used pervasively in tests and fixtures.
pub fn rat(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "zero denominator");
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `2^-k`, the geometric scale used by tail and threshold fixtures.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Canonical text form: `p/q` in lowest terms, `p` when q == 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses the canonical form; accepts optional surrounding whitespace and
/// rejects a zero denominator.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let trimmed = s.trim();
    let bad = || Error::InvalidRational(s.to_string());
    match trimmed.split_once('/') {
        None => trimmed.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
        Some((num, den)) => {
            let numer: BigInt = num.trim().parse().map_err(|_| bad())?;
            let denom: BigInt = den.trim().parse().map_err(|_| bad())?;
            if denom.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// Decimal rendering for the `--approx` flag; never used in stored output.
pub fn approx_decimal(r: &Rational) -> f64 {
    let numer = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let denom = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    numer / denom
}

pub fn parse_rationals(items: &[String]) -> Result<Vec<Rational>> {
    items.iter().map(|s| parse_rational(s)).collect()
}

pub fn format_rationals(items: &[Rational]) -> Vec<String> {
    items.iter().map(format_rational).collect()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}
