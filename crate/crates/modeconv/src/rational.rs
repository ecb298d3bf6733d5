//! Exact rational scalars used for breakpoints, measures and integrals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// The exact scalar type of the library.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact conversion of a finite `f64` (every finite float is rational).
pub fn rat_from_f64(x: f64) -> Result<Rat, Error> {
    Rat::from_f64(x).ok_or(Error::NonFiniteValue)
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `x^k` for a nonnegative integer exponent.
pub fn rat_pow(x: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    let mut base = x.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Parses "num/den", an integer, or a plain decimal like "-0.25".
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::BadRational(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::BadRational(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::BadRational(s.to_string()));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let neg = int_part.trim_start().starts_with('-');
        let int_digits = if int_part.is_empty() || int_part == "-" {
            "0".to_string()
        } else {
            int_part.to_string()
        };
        let i: BigInt = int_digits
            .parse()
            .map_err(|_| Error::BadRational(s.to_string()))?;
        if frac_part.is_empty() {
            return Ok(Rat::from_integer(i));
        }
        let f: BigInt = frac_part
            .parse()
            .map_err(|_| Error::BadRational(s.to_string()))?;
        if f.is_negative() {
            return Err(Error::BadRational(s.to_string()));
        }
        let scale = rat_pow(&rat_int(10), frac_part.len() as u32);
        let frac = Rat::from_integer(f) / scale;
        let abs = Rat::from_integer(i.abs()) + frac;
        return Ok(if neg { -abs } else { abs });
    }
    let n: BigInt = s.parse().map_err(|_| Error::BadRational(s.to_string()))?;
    Ok(Rat::from_integer(n))
}

/// Canonical "num/den" form ("num" when the denominator is 1).
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
