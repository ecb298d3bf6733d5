//! Cell values and integral results.
//!
//! A cell value is a rational linear combination of p-th roots of
//! nonnegative rationals, `sum_i c_i * t_i^{1/p}`. This closes the class
//! under the linear operations the library performs and keeps `|v|^p`
//! exactly rational in the single-term case for integer p, which is what
//! the canonical families produce (a spike of height n^{1/p} has p-th
//! power exactly n).

use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rational::{rat_pow, rat_to_f64, Rat};

/// Integrability exponent p >= 1, with its integer fast path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    p: f64,
    int: Option<u32>,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::BadExponent(p));
        }
        let int = if p.fract() == 0.0 && p <= 64.0 {
            Some(p as u32)
        } else {
            None
        };
        Ok(Exponent { p, int })
    }

    pub fn get(self) -> f64 {
        self.p
    }

    pub fn as_int(self) -> Option<u32> {
        self.int
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Term {
    coeff: Rat,
    /// Radicand of the p-th root; 1 marks a plain rational term.
    radicand: Rat,
}

/// A single cell value: `sum_i coeff_i * radicand_i^{1/p}`.
///
/// The interpretation depends on the exponent the carrying family is
/// calibrated to; the exponent is supplied at evaluation time.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Value {
    terms: Vec<Term>,
}

impl Value {
    pub fn zero() -> Self {
        Value { terms: Vec::new() }
    }

    pub fn from_rat(c: Rat) -> Self {
        if c.is_zero() {
            return Value::zero();
        }
        Value {
            terms: vec![Term {
                coeff: c,
                radicand: Rat::one(),
            }],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Value::from_rat(crate::rational::rat_int(n))
    }

    /// `coeff * radicand^{1/p}`; requires `radicand >= 0`.
    pub fn root(coeff: Rat, radicand: Rat) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::NonFiniteValue);
        }
        if coeff.is_zero() || radicand.is_zero() {
            return Ok(Value::zero());
        }
        let mut v = Value {
            terms: vec![Term { coeff, radicand }],
        };
        v.normalize();
        Ok(v)
    }

    fn normalize(&mut self) {
        self.terms
            .sort_by(|a, b| a.radicand.cmp(&b.radicand));
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.radicand == t.radicand => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        self.terms = merged;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Value) -> Value {
        let mut v = Value {
            terms: self
                .terms
                .iter()
                .chain(other.terms.iter())
                .cloned()
                .collect(),
        };
        v.normalize();
        v
    }

    pub fn sub(&self, other: &Value) -> Value {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Value {
        Value {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff.clone(),
                    radicand: t.radicand.clone(),
                })
                .collect(),
        }
    }

    pub fn scale(&self, a: &Rat) -> Value {
        if a.is_zero() {
            return Value::zero();
        }
        Value {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: a * &t.coeff,
                    radicand: t.radicand.clone(),
                })
                .collect(),
        }
    }

    /// The plain rational carried by this value, when it is one.
    pub fn as_rational(&self) -> Option<Rat> {
        match self.terms.as_slice() {
            [] => Some(Rat::zero()),
            [t] if t.radicand.is_one() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    pub fn to_f64(&self, p: Exponent) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let root = if t.radicand.is_one() {
                    1.0
                } else {
                    rat_to_f64(&t.radicand).powf(1.0 / p.get())
                };
                rat_to_f64(&t.coeff) * root
            })
            .sum()
    }

    /// `|v|^p`, exact whenever the representation allows it.
    pub fn abs_pow(&self, p: Exponent) -> Quantity {
        match (self.terms.as_slice(), p.as_int()) {
            ([], _) => Quantity::Exact(Rat::zero()),
            ([t], Some(k)) => {
                // (c * t^{1/p})^p = c^p * t
                Quantity::Exact(rat_pow(&t.coeff.abs(), k) * &t.radicand)
            }
            _ => Quantity::Approx(self.to_f64(p).abs().powf(p.get())),
        }
    }

    /// Whether `|v| >= delta` for `delta > 0`, exact where possible.
    pub fn abs_ge(&self, delta: &Rat, p: Exponent) -> bool {
        match self.abs_pow(p) {
            Quantity::Exact(w) => {
                if let Some(k) = p.as_int() {
                    w >= rat_pow(delta, k)
                } else {
                    w.to_f64().unwrap_or(f64::NAN) >= rat_to_f64(delta).powf(p.get())
                }
            }
            Quantity::Approx(w) => w >= rat_to_f64(delta).powf(p.get()),
        }
    }
}

/// A nonnegative statistic value: exactly rational when every ingredient
/// was, otherwise a float with small relative error.
#[derive(Clone, Debug)]
pub enum Quantity {
    Exact(Rat),
    Approx(f64),
}

impl Quantity {
    pub fn zero() -> Self {
        Quantity::Exact(Rat::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => rat_to_f64(r),
            Quantity::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Quantity::Exact(r) => r.is_zero(),
            Quantity::Approx(x) => *x == 0.0,
        }
    }

    pub fn add(&self, other: &Quantity) -> Quantity {
        match (self, other) {
            (Quantity::Exact(a), Quantity::Exact(b)) => Quantity::Exact(a + b),
            _ => Quantity::Approx(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> Quantity {
        match self {
            Quantity::Exact(a) => Quantity::Exact(a * r),
            Quantity::Approx(x) => Quantity::Approx(x * rat_to_f64(r)),
        }
    }

    pub fn scale_f64(&self, s: f64) -> Quantity {
        Quantity::Approx(self.to_f64() * s)
    }
}

impl PartialEq for Quantity {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Quantity::Exact(a), Quantity::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Quantity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Quantity::Exact(a), Quantity::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}
