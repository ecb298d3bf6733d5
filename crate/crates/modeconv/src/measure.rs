//! Interval measure spaces, measurable subsets and simple functions,
//! with exact Lebesgue measure and exact p-th power integrals.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat_to_f64, Rat};
use crate::value::{Exponent, Quantity, Value};

/// The carrier interval. A truncated half-line records that it stands for
/// `[0, oo)` cut at `T`; families built on it keep all difference mass
/// inside the truncation, so the cut tail is null for every statistic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Closed { a: Rat, b: Rat },
    TruncatedHalfLine { t: Rat },
}

impl Domain {
    pub fn closed(a: Rat, b: Rat) -> Result<Self> {
        if a >= b {
            return Err(Error::BadDomain);
        }
        Ok(Domain::Closed { a, b })
    }

    pub fn unit() -> Self {
        Domain::Closed {
            a: Rat::zero(),
            b: Rat::from_integer(1.into()),
        }
    }

    pub fn half_line(t: Rat) -> Result<Self> {
        if t <= Rat::zero() {
            return Err(Error::BadDomain);
        }
        Ok(Domain::TruncatedHalfLine { t })
    }

    pub fn left(&self) -> Rat {
        match self {
            Domain::Closed { a, .. } => a.clone(),
            Domain::TruncatedHalfLine { .. } => Rat::zero(),
        }
    }

    pub fn right(&self) -> Rat {
        match self {
            Domain::Closed { b, .. } => b.clone(),
            Domain::TruncatedHalfLine { t } => t.clone(),
        }
    }

    pub fn length(&self) -> Rat {
        self.right() - self.left()
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self, Domain::TruncatedHalfLine { .. })
    }
}

/// Strictly increasing rational breakpoints spanning the domain; cells are
/// the consecutive half-open intervals `[b_i, b_{i+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    domain: Domain,
    breakpoints: Vec<Rat>,
}

impl Partition {
    pub fn new(domain: Domain, breakpoints: Vec<Rat>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::BadPartition("need at least two breakpoints".into()));
        }
        if breakpoints[0] != domain.left() {
            return Err(Error::BadPartition(
                "first breakpoint must be the left end of the domain".into(),
            ));
        }
        if *breakpoints.last().unwrap() != domain.right() {
            return Err(Error::BadPartition(
                "last breakpoint must be the right end of the domain".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadPartition(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Partition { domain, breakpoints })
    }

    pub fn trivial(domain: Domain) -> Self {
        let bps = vec![domain.left(), domain.right()];
        Partition {
            domain,
            breakpoints: bps,
        }
    }

    /// Dyadic partition of the domain into `2^level` equal cells.
    pub fn dyadic(domain: Domain, level: u32) -> Self {
        let n = 1u64 << level;
        let left = domain.left();
        let step = domain.length() / Rat::from_integer(n.into());
        let mut bps = Vec::with_capacity(n as usize + 1);
        for i in 0..=n {
            bps.push(&left + &step * Rat::from_integer(i.into()));
        }
        Partition {
            domain,
            breakpoints: bps,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn cell_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Rat, &Rat)> {
        self.breakpoints.windows(2).map(|w| (&w[0], &w[1]))
    }

    /// Sorted union of both breakpoint lists; both inputs are
    /// piecewise-constant on the result.
    pub fn refine(&self, other: &Partition) -> Result<Partition> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let mut bps = Vec::with_capacity(self.breakpoints.len() + other.breakpoints.len());
        let (mut i, mut j) = (0, 0);
        while i < self.breakpoints.len() || j < other.breakpoints.len() {
            let next = match (self.breakpoints.get(i), other.breakpoints.get(j)) {
                (Some(a), Some(b)) => {
                    if a < b {
                        i += 1;
                        a.clone()
                    } else if b < a {
                        j += 1;
                        b.clone()
                    } else {
                        i += 1;
                        j += 1;
                        a.clone()
                    }
                }
                (Some(a), None) => {
                    i += 1;
                    a.clone()
                }
                (None, Some(b)) => {
                    j += 1;
                    b.clone()
                }
                (None, None) => unreachable!(),
            };
            bps.push(next);
        }
        Ok(Partition {
            domain: self.domain.clone(),
            breakpoints: bps,
        })
    }
}

/// Piecewise-constant real function on a rational-endpoint partition.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    partition: Partition,
    values: Vec<Value>,
}

impl SimpleFunction {
    pub fn new(partition: Partition, values: Vec<Value>) -> Result<Self> {
        if values.len() != partition.cell_count() {
            return Err(Error::BadPartition(
                "value count must equal cell count".into(),
            ));
        }
        Ok(SimpleFunction { partition, values })
    }

    pub fn constant(domain: Domain, v: Value) -> Self {
        SimpleFunction {
            partition: Partition::trivial(domain),
            values: vec![v],
        }
    }

    pub fn zero(domain: Domain) -> Self {
        SimpleFunction::constant(domain, Value::zero())
    }

    /// `v * chi_[lo, hi)` on the given domain, 0 elsewhere.
    pub fn indicator(domain: Domain, lo: Rat, hi: Rat, v: Value) -> Result<Self> {
        let (left, right) = (domain.left(), domain.right());
        if lo < left || hi > right || lo >= hi {
            return Err(Error::BadPartition("indicator support outside domain".into()));
        }
        let mut bps = vec![left.clone()];
        let mut vals = Vec::new();
        if lo > left {
            bps.push(lo.clone());
            vals.push(Value::zero());
        }
        bps.push(hi.clone());
        vals.push(v);
        if hi < right {
            bps.push(right);
            vals.push(Value::zero());
        }
        let partition = Partition::new(domain, bps)?;
        SimpleFunction::new(partition, vals)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn domain(&self) -> &Domain {
        self.partition.domain()
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value_at(&self, x: &Rat) -> Option<&Value> {
        let bps = self.partition.breakpoints();
        if x < &bps[0] || x >= bps.last().unwrap() {
            return None;
        }
        let idx = match bps.binary_search(x) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.values.get(idx.min(self.values.len() - 1))
    }

    /// Re-expresses the function on a refinement of its own partition.
    fn on_refinement(&self, fine: &Partition) -> Vec<Value> {
        let mut out = Vec::with_capacity(fine.cell_count());
        let mut idx = 0usize;
        let own = self.partition.breakpoints();
        for (lo, _hi) in fine.cells() {
            while idx + 2 < own.len() && &own[idx + 1] <= lo {
                idx += 1;
            }
            out.push(self.values[idx].clone());
        }
        out
    }

    /// Common refinement with aligned per-cell value pairs.
    pub fn align(&self, other: &SimpleFunction) -> Result<(Partition, Vec<(Value, Value)>)> {
        let fine = self.partition.refine(&other.partition)?;
        let a = self.on_refinement(&fine);
        let b = other.on_refinement(&fine);
        Ok((fine, a.into_iter().zip(b).collect()))
    }

    pub fn map_values(&self, f: impl Fn(&Value) -> Value) -> SimpleFunction {
        SimpleFunction {
            partition: self.partition.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// `a*self + b*other` on the common refinement.
    pub fn linear(&self, a: &Rat, other: &SimpleFunction, b: &Rat) -> Result<SimpleFunction> {
        let (fine, pairs) = self.align(other)?;
        let values = pairs
            .into_iter()
            .map(|(u, v)| u.scale(a).add(&v.scale(b)))
            .collect();
        Ok(SimpleFunction {
            partition: fine,
            values,
        })
    }

    /// `max_x |self - other|` as a float (ties to the trend diagnostics,
    /// never to an exact certificate).
    pub fn sup_abs_diff(&self, other: &SimpleFunction, p: Exponent) -> Result<f64> {
        let (_, pairs) = self.align(other)?;
        Ok(pairs
            .iter()
            .map(|(u, v)| u.sub(v).to_f64(p).abs())
            .fold(0.0, f64::max))
    }
}

/// Finite union of disjoint sorted half-open rational intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurableSubset {
    domain: Domain,
    intervals: Vec<(Rat, Rat)>,
}

impl MeasurableSubset {
    pub fn empty(domain: Domain) -> Self {
        MeasurableSubset {
            domain,
            intervals: Vec::new(),
        }
    }

    pub fn full(domain: Domain) -> Self {
        let iv = (domain.left(), domain.right());
        MeasurableSubset {
            domain,
            intervals: vec![iv],
        }
    }

    pub fn from_intervals(domain: Domain, mut intervals: Vec<(Rat, Rat)>) -> Result<Self> {
        intervals.retain(|(lo, hi)| lo < hi);
        for (lo, hi) in &intervals {
            if *lo < domain.left() || *hi > domain.right() {
                return Err(Error::BadSubset("interval outside domain".into()));
            }
        }
        intervals.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some((_, phi)) if lo < *phi => {
                    return Err(Error::BadSubset("intervals overlap".into()));
                }
                Some((_, phi)) if lo == *phi => *phi = hi,
                _ => merged.push((lo, hi)),
            }
        }
        Ok(MeasurableSubset {
            domain,
            intervals: merged,
        })
    }

    pub fn interval(domain: Domain, lo: Rat, hi: Rat) -> Result<Self> {
        MeasurableSubset::from_intervals(domain, vec![(lo, hi)])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Exact Lebesgue measure: the sum of interval lengths.
    pub fn measure(&self) -> Rat {
        self.intervals
            .iter()
            .fold(Rat::zero(), |acc, (lo, hi)| acc + (hi - lo))
    }

    /// Exact complement within the domain.
    pub fn complement(&self) -> MeasurableSubset {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = self.domain.left();
        for (lo, hi) in &self.intervals {
            if &cursor < lo {
                out.push((cursor.clone(), lo.clone()));
            }
            cursor = hi.clone();
        }
        let right = self.domain.right();
        if cursor < right {
            out.push((cursor, right));
        }
        MeasurableSubset {
            domain: self.domain.clone(),
            intervals: out,
        }
    }

    pub fn intersect(&self, other: &MeasurableSubset) -> Result<MeasurableSubset> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let mut out = Vec::new();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (alo, ahi) = &self.intervals[i];
            let (blo, bhi) = &other.intervals[j];
            let lo = alo.max(blo).clone();
            let hi = ahi.min(bhi).clone();
            if lo < hi {
                out.push((lo, hi));
            }
            if ahi <= bhi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(MeasurableSubset {
            domain: self.domain.clone(),
            intervals: out,
        })
    }

    pub fn union(&self, other: &MeasurableSubset) -> Result<MeasurableSubset> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        // De Morgan keeps the disjoint-sorted invariant for free.
        self.complement()
            .intersect(&other.complement())
            .map(|s| s.complement())
    }

    /// Length of the overlap of `[lo, hi)` with this set.
    pub fn overlap_length(&self, lo: &Rat, hi: &Rat) -> Rat {
        let mut total = Rat::zero();
        for (slo, shi) in &self.intervals {
            if shi <= lo {
                continue;
            }
            if slo >= hi {
                break;
            }
            let l = slo.max(lo);
            let h = shi.min(hi);
            if l < h {
                total += h - l;
            }
        }
        total
    }
}

/// `int_s |f - g|^p dmu`, exact over the rational single-root value class
/// for integer p, floating otherwise.
pub fn integrate_p(
    f: &SimpleFunction,
    g: &SimpleFunction,
    p: Exponent,
    s: &MeasurableSubset,
) -> Result<Quantity> {
    if f.domain() != s.domain() {
        return Err(Error::DomainMismatch);
    }
    let (fine, pairs) = f.align(g)?;
    let mut total = Quantity::zero();
    for ((lo, hi), (u, v)) in fine.cells().zip(pairs.iter()) {
        let diff = u.sub(v);
        if diff.is_zero() {
            continue;
        }
        let overlap = s.overlap_length(lo, hi);
        if overlap.is_zero() {
            continue;
        }
        total = total.add(&diff.abs_pow(p).mul_rat(&overlap));
    }
    Ok(total)
}

/// `{x : |f(x) - g(x)| >= delta}` as an exact union of refined cells.
pub fn superlevel_set(
    f: &SimpleFunction,
    g: &SimpleFunction,
    delta: &Rat,
    p: Exponent,
) -> Result<MeasurableSubset> {
    if !delta.is_positive() {
        return Err(Error::BadThreshold(rat_to_f64(delta)));
    }
    let (fine, pairs) = f.align(g)?;
    let mut intervals = Vec::new();
    for ((lo, hi), (u, v)) in fine.cells().zip(pairs.iter()) {
        if u.sub(v).abs_ge(delta, p) {
            intervals.push((lo.clone(), hi.clone()));
        }
    }
    MeasurableSubset::from_intervals(fine.domain().clone(), intervals)
}
