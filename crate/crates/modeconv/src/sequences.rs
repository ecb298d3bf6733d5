//! The canonical example families and user-defined families, packaged
//! with their limits and, where a canonical choice exists, their witness
//! sets.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{Domain, MeasurableSubset, SimpleFunction};
use crate::rational::{rat_int, Rat};
use crate::value::{Exponent, Value};

type GenFn = dyn Fn(u32) -> Result<SimpleFunction> + Send + Sync;
type WitnessFn = dyn Fn(u32) -> Result<MeasurableSubset> + Send + Sync;

/// An indexed generator `n -> f_n` with a limit candidate and an optional
/// canonical witness-set sequence. Lazy and horizon-bounded: terms are
/// built on demand, and a family may re-truncate its domain per index
/// (the spreading family lives on `[0, n)`).
#[derive(Clone)]
pub struct SequenceFamily {
    name: String,
    p: Exponent,
    gen: Arc<GenFn>,
    limit: Option<Arc<GenFn>>,
    witness: Option<Arc<WitnessFn>>,
}

impl SequenceFamily {
    pub fn new(
        name: impl Into<String>,
        p: Exponent,
        gen: Arc<GenFn>,
        limit: Option<Arc<GenFn>>,
        witness: Option<Arc<WitnessFn>>,
    ) -> Self {
        SequenceFamily {
            name: name.into(),
            p,
            gen,
            limit,
            witness,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn term(&self, n: u32) -> Result<SimpleFunction> {
        (self.gen)(n)
    }

    /// The limit candidate, re-truncated to the domain of index `n`.
    pub fn limit_at(&self, n: u32) -> Result<SimpleFunction> {
        match &self.limit {
            Some(l) => l(n),
            None => Err(Error::MissingLimit),
        }
    }

    pub fn has_limit(&self) -> bool {
        self.limit.is_some()
    }

    pub fn witness_at(&self, n: u32) -> Result<MeasurableSubset> {
        match &self.witness {
            Some(w) => w(n),
            None => Err(Error::MissingWitness),
        }
    }

    pub fn has_witness(&self) -> bool {
        self.witness.is_some()
    }

    pub fn domain_for(&self, n: u32) -> Result<Domain> {
        Ok(self.term(n)?.domain().clone())
    }

    pub fn with_limit(mut self, limit: Arc<GenFn>) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn with_witness(mut self, witness: Arc<WitnessFn>) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn without_limit(mut self) -> Self {
        self.limit = None;
        self
    }

    /// Family with every term given by an explicit table; indices missing
    /// from the table are errors.
    pub fn from_table(
        name: impl Into<String>,
        p: Exponent,
        terms: BTreeMap<u32, SimpleFunction>,
        limit: Option<SimpleFunction>,
        witnesses: Option<BTreeMap<u32, MeasurableSubset>>,
    ) -> Self {
        let terms = Arc::new(terms);
        let gen_terms = Arc::clone(&terms);
        let gen: Arc<GenFn> = Arc::new(move |n| {
            gen_terms.get(&n).cloned().ok_or(Error::TableGap(n))
        });
        let limit_fn: Option<Arc<GenFn>> = limit.map(|l| {
            let l = Arc::new(l);
            Arc::new(move |_n: u32| Ok((*l).clone())) as Arc<GenFn>
        });
        let witness_fn: Option<Arc<WitnessFn>> = witnesses.map(|ws| {
            let ws = Arc::new(ws);
            Arc::new(move |n: u32| ws.get(&n).cloned().ok_or(Error::TableGap(n))) as Arc<WitnessFn>
        });
        SequenceFamily::new(name, p, gen, limit_fn, witness_fn)
    }
}

/// Position of index `n` in the dyadic sweep: `n = 2^k + j`, `0 <= j < 2^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypewriterIndex {
    pub k: u32,
    pub j: u32,
}

pub fn typewriter_index(n: u32) -> Result<TypewriterIndex> {
    if n < 1 {
        return Err(Error::BadConfig("typewriter index starts at 1".into()));
    }
    let k = 31 - n.leading_zeros();
    let j = n - (1 << k);
    Ok(TypewriterIndex { k, j })
}

/// The dyadic block `[j/2^k, (j+1)/2^k)` swept by index `n`.
pub fn typewriter_block(n: u32) -> Result<(Rat, Rat)> {
    let TypewriterIndex { k, j } = typewriter_index(n)?;
    let den = rat_int(1i64 << k);
    Ok((
        rat_int(j as i64) / den.clone(),
        rat_int(j as i64 + 1) / den,
    ))
}

pub const GALLERY_NAMES: [&str; 4] = ["spike", "spread", "typewriter", "constant"];

/// The built-in families, calibrated to the exponent `p`.
///
/// * `spike`: `n^{1/p}` on `[0, 1/n)` in `[0, 1]`, limit 0, witness `(1/n, 1]`.
/// * `spread`: `n^{-1/p}` on `[0, n)` in the truncated half-line `[0, n)`,
///   limit 0, no canonical witness.
/// * `typewriter`: `2^{k/p}` on the sweeping dyadic block, limit 0,
///   witness the block's complement.
/// * `constant`: a fixed function, its own limit.
pub fn gallery(name: &str, p: Exponent) -> Result<SequenceFamily> {
    match name {
        "spike" => {
            let gen: Arc<GenFn> = Arc::new(|n| {
                if n == 0 {
                    return Err(Error::BadConfig("index starts at 1".into()));
                }
                let height = Value::root(rat_int(1), rat_int(n as i64))?;
                SimpleFunction::indicator(Domain::unit(), rat_int(0), rat(1, n), height)
            });
            let limit: Arc<GenFn> = Arc::new(|_| Ok(SimpleFunction::zero(Domain::unit())));
            let witness: Arc<WitnessFn> = Arc::new(|n| {
                MeasurableSubset::interval(Domain::unit(), rat(1, n), rat_int(1))
            });
            Ok(SequenceFamily::new(
                "spike",
                p,
                gen,
                Some(limit),
                Some(witness),
            ))
        }
        "spread" => {
            let gen: Arc<GenFn> = Arc::new(|n| {
                if n == 0 {
                    return Err(Error::BadConfig("index starts at 1".into()));
                }
                let dom = Domain::half_line(rat_int(n as i64))?;
                let height = Value::root(rat_int(1), rat(1, n))?;
                SimpleFunction::indicator(dom, rat_int(0), rat_int(n as i64), height)
            });
            let limit: Arc<GenFn> = Arc::new(|n| {
                Ok(SimpleFunction::zero(Domain::half_line(rat_int(n as i64))?))
            });
            Ok(SequenceFamily::new("spread", p, gen, Some(limit), None))
        }
        "typewriter" => {
            let gen: Arc<GenFn> = Arc::new(|n| {
                let TypewriterIndex { k, .. } = typewriter_index(n)?;
                let (lo, hi) = typewriter_block(n)?;
                let height = Value::root(rat_int(1), rat_int(1i64 << k))?;
                SimpleFunction::indicator(Domain::unit(), lo, hi, height)
            });
            let limit: Arc<GenFn> = Arc::new(|_| Ok(SimpleFunction::zero(Domain::unit())));
            let witness: Arc<WitnessFn> = Arc::new(|n| {
                let (lo, hi) = typewriter_block(n)?;
                Ok(MeasurableSubset::interval(Domain::unit(), lo, hi)?.complement())
            });
            Ok(SequenceFamily::new(
                "typewriter",
                p,
                gen,
                Some(limit),
                Some(witness),
            ))
        }
        "constant" => {
            let f = SimpleFunction::constant(Domain::unit(), Value::from_int(1));
            let f2 = f.clone();
            let gen: Arc<GenFn> = Arc::new(move |_| Ok(f.clone()));
            let limit: Arc<GenFn> = Arc::new(move |_| Ok(f2.clone()));
            let witness: Arc<WitnessFn> =
                Arc::new(|_| Ok(MeasurableSubset::full(Domain::unit())));
            Ok(SequenceFamily::new(
                "constant",
                p,
                gen,
                Some(limit),
                Some(witness),
            ))
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

fn rat(num: i64, den: u32) -> Rat {
    crate::rational::rat(num, den as i64)
}

/// `a*fam1 + b*fam2`, with composite witness `C_n = B_n \cap D_n` when
/// both inputs carry witnesses.
pub fn combine(
    fam1: &SequenceFamily,
    fam2: &SequenceFamily,
    a: Rat,
    b: Rat,
) -> Result<SequenceFamily> {
    if fam1.p() != fam2.p() {
        return Err(Error::ExponentMismatch);
    }
    let name = format!("{}+{}", fam1.name(), fam2.name());
    let (g1, g2) = (Arc::clone(&fam1.gen), Arc::clone(&fam2.gen));
    let (a1, b1) = (a.clone(), b.clone());
    let gen: Arc<GenFn> = Arc::new(move |n| g1(n)?.linear(&a1, &g2(n)?, &b1));
    let limit: Option<Arc<GenFn>> = match (&fam1.limit, &fam2.limit) {
        (Some(l1), Some(l2)) => {
            let (l1, l2) = (Arc::clone(l1), Arc::clone(l2));
            let (a2, b2) = (a, b);
            Some(Arc::new(move |n| l1(n)?.linear(&a2, &l2(n)?, &b2)) as Arc<GenFn>)
        }
        _ => None,
    };
    let witness: Option<Arc<WitnessFn>> = match (&fam1.witness, &fam2.witness) {
        (Some(w1), Some(w2)) => {
            let (w1, w2) = (Arc::clone(w1), Arc::clone(w2));
            Some(Arc::new(move |n| w1(n)?.intersect(&w2(n)?)) as Arc<WitnessFn>)
        }
        _ => None,
    };
    Ok(SequenceFamily::new(name, fam1.p(), gen, limit, witness))
}
