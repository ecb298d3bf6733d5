//! Composition with scalar maps: which maps preserve the convergence
//! modes, and the block counterexample for those that do not.
//!
//! A Lipschitz map preserves every mode here; a non-Lipschitz map admits
//! breaking pairs (a, b) arbitrarily close together whose images are
//! stretched by more than any fixed factor, and those pairs assemble
//! into a sequence that converges before composition and in no mode
//! after it.

use num_traits::{One, Signed, Zero};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{Domain, Partition, SimpleFunction};
use crate::modes::{verdict, DecayCriterion, Mode, ModeReport, Verdict};
use crate::rational::{rat, rat_from_f64, rat_int, rat_pow, rat_to_f64, Rat};
use crate::sequences::SequenceFamily;
use crate::value::{Exponent, Value};

#[derive(Clone, Debug)]
pub enum ScalarMap {
    Identity,
    Affine { a: Rat, b: Rat },
    Abs,
    Square,
    SqrtAbs,
    /// Piecewise-linear interpolation through sorted sample points.
    Tabulated { points: Vec<(Rat, Rat)> },
}

impl ScalarMap {
    pub fn tabulated(mut points: Vec<(Rat, Rat)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::BadConfig("table needs at least two points".into()));
        }
        points.sort_by(|a, b| a.0.cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::BadConfig("table abscissae must be distinct".into()));
        }
        Ok(ScalarMap::Tabulated { points })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarMap::Identity => "identity",
            ScalarMap::Affine { .. } => "affine",
            ScalarMap::Abs => "abs",
            ScalarMap::Square => "square",
            ScalarMap::SqrtAbs => "sqrt_abs",
            ScalarMap::Tabulated { .. } => "tabulated",
        }
    }

    /// Exact image of a rational argument where the map allows it; the
    /// square root becomes a radical term at p = 2 and a float-snapped
    /// rational otherwise.
    pub fn apply_rat(&self, x: &Rat, p: Exponent) -> Result<Value> {
        match self {
            ScalarMap::Identity => Ok(Value::from_rat(x.clone())),
            ScalarMap::Affine { a, b } => Ok(Value::from_rat(a * x + b)),
            ScalarMap::Abs => Ok(Value::from_rat(x.abs())),
            ScalarMap::Square => Ok(Value::from_rat(x * x)),
            ScalarMap::SqrtAbs => {
                if p.as_int() == Some(2) {
                    Value::root(Rat::one(), x.abs())
                } else {
                    let y = rat_to_f64(x).abs().sqrt();
                    Ok(Value::from_rat(rat_from_f64(y)?))
                }
            }
            ScalarMap::Tabulated { points } => {
                let first = &points[0];
                let last = points.last().unwrap();
                if x < &first.0 || x > &last.0 {
                    return Err(Error::BadDomain);
                }
                for w in points.windows(2) {
                    let (x0, y0) = &w[0];
                    let (x1, y1) = &w[1];
                    if x <= x1 {
                        let t = (x - x0) / (x1 - x0);
                        return Ok(Value::from_rat(y0 + &t * (y1 - y0)));
                    }
                }
                Ok(Value::from_rat(last.1.clone()))
            }
        }
    }

    pub fn apply_value(&self, v: &Value, p: Exponent) -> Result<Value> {
        if let Some(x) = v.as_rational() {
            return self.apply_rat(&x, p);
        }
        let y = v.to_f64(p);
        if !y.is_finite() {
            return Err(Error::NonFiniteValue);
        }
        match self {
            ScalarMap::Identity => Ok(v.clone()),
            ScalarMap::Affine { a, b } => Ok(v.scale(a).add(&Value::from_rat(b.clone()))),
            ScalarMap::Abs => self.apply_rat(&rat_from_f64(y.abs())?, p),
            ScalarMap::Square => Ok(Value::from_rat(rat_from_f64(y * y)?)),
            ScalarMap::SqrtAbs => Ok(Value::from_rat(rat_from_f64(y.abs().sqrt())?)),
            ScalarMap::Tabulated { .. } => self.apply_rat(&rat_from_f64(y)?, p),
        }
    }

    pub fn compose_function(&self, f: &SimpleFunction, p: Exponent) -> Result<SimpleFunction> {
        let values = f
            .values()
            .iter()
            .map(|v| self.apply_value(v, p))
            .collect::<Result<Vec<_>>>()?;
        SimpleFunction::new(f.partition().clone(), values)
    }

    /// Composes term by term; the limit is mapped too and witnesses are
    /// carried along unchanged.
    pub fn compose_family(&self, fam: &SequenceFamily) -> SequenceFamily {
        let p = fam.p();
        let map = self.clone();
        let inner = fam.clone();
        let gen = Arc::new(move |n: u32| map.compose_function(&inner.term(n)?, p));
        let mut out = SequenceFamily::new(
            format!("{}({})", self.name(), fam.name()),
            p,
            gen,
            None,
            None,
        );
        if fam.has_limit() {
            let map = self.clone();
            let inner = fam.clone();
            out = out.with_limit(Arc::new(move |n: u32| {
                map.compose_function(&inner.limit_at(n)?, p)
            }));
        }
        if fam.has_witness() {
            let inner = fam.clone();
            out = out.with_witness(Arc::new(move |n: u32| inner.witness_at(n)));
        }
        out
    }
}

/// Lipschitz diagnosis on an interval: a grid lower bound on the best
/// constant, an exact constant for the closed-form maps, and a verdict
/// when the form decides it.
#[derive(Clone, Debug)]
pub struct LipschitzEstimate {
    pub lo: f64,
    pub hi: f64,
    pub grid_quotient_max: f64,
    pub certified_constant: Option<f64>,
    pub lipschitz: Option<bool>,
}

pub fn estimate_lipschitz(
    map: &ScalarMap,
    lo: &Rat,
    hi: &Rat,
    samples: u32,
) -> Result<LipschitzEstimate> {
    if lo >= hi || samples < 2 {
        return Err(Error::BadConfig("need lo < hi and at least two samples".into()));
    }
    let p = Exponent::new(2.0).unwrap();
    let width = hi - lo;
    let eval = |x: &Rat| -> Result<f64> { Ok(map.apply_rat(x, p)?.to_f64(p)) };
    // adjacent difference quotients on the grid, then three rounds of
    // local refinement around the worst pair (chains past kinks)
    let mut pts: Vec<Rat> = (0..=samples)
        .map(|i| lo + &width * rat(i as i64, samples as i64))
        .collect();
    let mut best = 0.0f64;
    for _ in 0..4 {
        let mut worst_at = 0usize;
        for i in 0..pts.len() - 1 {
            let q = (eval(&pts[i + 1])? - eval(&pts[i])?).abs()
                / rat_to_f64(&(&pts[i + 1] - &pts[i]));
            if q > best {
                best = q;
                worst_at = i;
            }
        }
        let mid = (&pts[worst_at] + &pts[worst_at + 1]) / rat_int(2);
        pts = vec![pts[worst_at].clone(), mid, pts[worst_at + 1].clone()];
    }
    let bound = |x: &Rat| rat_to_f64(x).abs();
    let (certified, lipschitz) = match map {
        ScalarMap::Identity => (Some(1.0), Some(true)),
        ScalarMap::Affine { a, .. } => (Some(rat_to_f64(&a.abs())), Some(true)),
        ScalarMap::Abs => (Some(1.0), Some(true)),
        ScalarMap::Square => (Some(2.0 * bound(lo).max(bound(hi))), Some(true)),
        ScalarMap::SqrtAbs => {
            if lo.is_positive() || hi.is_negative() {
                let m = bound(lo).min(bound(hi));
                (Some(0.5 / m.sqrt()), Some(true))
            } else {
                // slope blows up at the origin
                (None, Some(false))
            }
        }
        ScalarMap::Tabulated { points } => {
            let mut m = 0.0f64;
            for w in points.windows(2) {
                let s = rat_to_f64(&((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))).abs();
                m = m.max(s);
            }
            (Some(m), Some(true))
        }
    };
    Ok(LipschitzEstimate {
        lo: rat_to_f64(lo),
        hi: rat_to_f64(hi),
        grid_quotient_max: best,
        certified_constant: certified,
        lipschitz,
    })
}

/// A pair with `0 < |a - b| < n^{-1/p}` whose images are stretched by
/// more than `n^{1/p}`, checked exactly on p-th powers where the map
/// output is rational.
#[derive(Clone, Debug)]
pub struct BreakingPair {
    pub n: u32,
    pub a: Rat,
    pub b: Rat,
}

fn offset_base(n: u32, p: Exponent) -> Result<Rat> {
    // rational stand-in for n^{-1/p}, kept strictly below it
    match p.as_int() {
        Some(1) => Ok(rat(1, n as i64)),
        _ => rat_from_f64((n as f64).powf(-1.0 / p.get())),
    }
}

fn stretch_exceeded(map: &ScalarMap, a: &Rat, b: &Rat, n: u32, p: Exponent) -> Result<bool> {
    let h = (a - b).abs();
    let fa = map.apply_rat(a, p)?;
    let fb = map.apply_rat(b, p)?;
    let image = fa.sub(&fb).abs_pow(p);
    match (image.as_exact(), p.as_int()) {
        (Some(w), Some(k)) => Ok(w > &(rat_int(n as i64) * rat_pow(&h, k))),
        _ => Ok(image.to_f64() > (n as f64) * rat_to_f64(&h).powf(p.get())),
    }
}

/// Least-index scan: centers 0, 1, -1, 2, -2, ..., 2^20, then the
/// negative powers down to 2^-40; offsets halve from just under
/// `n^{-1/p}`. Errors with the first index that exhausts the scan.
pub fn find_breaking_pairs(
    map: &ScalarMap,
    p: Exponent,
    count: u32,
) -> Result<Vec<BreakingPair>> {
    let mut centers: Vec<Rat> = vec![Rat::zero()];
    for i in 0..=20 {
        let c = rat(1i64 << i, 1);
        centers.push(c.clone());
        centers.push(-c);
    }
    for i in 1..=40 {
        let c = rat(1, 1i64 << i);
        centers.push(c.clone());
        centers.push(-c);
    }
    let mut pairs = Vec::with_capacity(count as usize);
    'outer: for n in 1..=count {
        let base = offset_base(n, p)?;
        let strict = |h: &Rat| match p.as_int() {
            Some(k) => rat_pow(h, k) < rat(1, n as i64),
            None => rat_to_f64(h) < (n as f64).powf(-1.0 / p.get()),
        };
        for c in &centers {
            let mut h = &base / rat_int(2);
            for _ in 1..=40 {
                if strict(&h) {
                    let a = c.clone();
                    let b = c + &h;
                    if stretch_exceeded(map, &a, &b, n, p)? {
                        pairs.push(BreakingPair { n, a, b });
                        continue 'outer;
                    }
                }
                h = &h / rat_int(2);
            }
        }
        return Err(Error::NoBreakingPair(n));
    }
    Ok(pairs)
}

/// The block sequence built from breaking pairs: block n has length
/// `L_n = |a_n - b_n|^{-p}`, the limit takes the value `b_n` on the
/// final `L_n / n` of the block, and the n-th term replaces it by `a_n`
/// there. Before composition the Lp statistic is exactly `1/n`; after
/// composition more than `1/2` of mass survives any witness whose
/// complement has measure below `1/2`.
pub fn build_counterexample(
    map: &ScalarMap,
    p: Exponent,
    horizon: u32,
) -> Result<SequenceFamily> {
    let pairs = find_breaking_pairs(map, p, horizon)?;
    counterexample_family(&format!("counterexample({})", map.name()), &pairs, p)
}

/// The same block construction from an explicit pair sequence; pair n
/// must satisfy `0 < |a_n - b_n| < n^{-1/p}`.
pub fn counterexample_family(
    name: &str,
    pairs: &[BreakingPair],
    p: Exponent,
) -> Result<SequenceFamily> {
    if pairs.is_empty() {
        return Err(Error::BadConfig("need at least one pair".into()));
    }
    let mut starts = vec![Rat::zero()];
    let mut lengths = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let h = (&pair.a - &pair.b).abs();
        let len = match p.as_int() {
            Some(k) => rat_pow(&h, k).recip(),
            None => rat_from_f64(rat_to_f64(&h).powf(-p.get()))?,
        };
        starts.push(starts.last().unwrap() + &len);
        lengths.push(len);
    }
    let domain = Domain::closed(Rat::zero(), starts.last().unwrap().clone())?;
    // block n splits into a zero filler and the final 1/n fraction I_n
    // (block 1 is all I_1, no filler)
    let mut segments: Vec<(Rat, Value)> = Vec::new(); // (right edge, limit value)
    let mut i_cells = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let start = &starts[i];
        let end = &starts[i + 1];
        let cut = end - &lengths[i] / rat_int(pair.n as i64);
        if &cut > start {
            segments.push((cut, Value::zero()));
        }
        i_cells.push(segments.len());
        segments.push((end.clone(), Value::from_rat(pair.b.clone())));
    }
    let mut breakpoints = vec![Rat::zero()];
    breakpoints.extend(segments.iter().map(|(r, _)| r.clone()));
    let partition = Partition::new(domain.clone(), breakpoints)?;
    let limit_values: Vec<Value> = segments.into_iter().map(|(_, v)| v).collect();
    let limit = SimpleFunction::new(partition.clone(), limit_values.clone())?;
    let terms: Vec<SimpleFunction> = pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let mut vals = limit_values.clone();
            vals[i_cells[i]] = Value::from_rat(pair.a.clone());
            SimpleFunction::new(partition.clone(), vals)
        })
        .collect::<Result<_>>()?;
    let limit_fn = limit.clone();
    Ok(SequenceFamily::new(
        name.to_string(),
        p,
        Arc::new(move |n| {
            terms
                .get(n as usize - 1)
                .cloned()
                .ok_or(Error::HorizonExhausted(n))
        }),
        None,
        None,
    )
    .with_limit(Arc::new(move |_| Ok(limit_fn.clone()))))
}

#[derive(Clone, Debug)]
pub struct PreservationReport {
    pub map_name: String,
    pub estimate: LipschitzEstimate,
    pub before: Vec<ModeReport>,
    pub after: Vec<ModeReport>,
    pub preserved: bool,
}

/// Runs the verdict engine on a family and on its composition with the
/// map; preservation means every mode certified before stays certified
/// after.
pub fn verify_preservation(
    map: &ScalarMap,
    fam: &SequenceFamily,
    horizon: u32,
    criterion: &DecayCriterion,
    delta_grid: &[Rat],
) -> Result<PreservationReport> {
    let before = verdict(fam, horizon, criterion, delta_grid)?;
    let composed = map.compose_family(fam);
    let after = verdict(&composed, horizon, criterion, delta_grid)?;
    let preserved = [Mode::Lp, Mode::AlmostLp, Mode::AlphaP, Mode::Measure]
        .into_iter()
        .all(|m| {
            let b = crate::modes::report_for(&before, m).verdict;
            let a = crate::modes::report_for(&after, m).verdict;
            b != Verdict::CertifiedHolds || a == Verdict::CertifiedHolds
        });
    // the map acts on values, so the estimate covers the value range
    // seen across the horizon, padded to a nondegenerate interval
    let p = fam.p();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in 1..=horizon {
        for f in [fam.term(n)?, fam.limit_at(n)?] {
            for v in f.values() {
                let x = v.to_f64(p);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    let (lo, hi) = if hi - lo < 1.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    };
    let estimate = estimate_lipschitz(map, &rat_from_f64(lo)?, &rat_from_f64(hi)?, 64)?;
    Ok(PreservationReport {
        map_name: map.name().into(),
        estimate,
        before,
        after,
        preserved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{integrate_p, MeasurableSubset};
    use crate::modes::{default_delta_grid, lp_stat, report_for, worst_small_set};
    use crate::sequences::gallery;

    fn p1() -> Exponent {
        Exponent::new(1.0).unwrap()
    }

    fn p2() -> Exponent {
        Exponent::new(2.0).unwrap()
    }

    #[test]
    fn lipschitz_constants_for_closed_forms() {
        let e = estimate_lipschitz(&ScalarMap::Square, &rat(-3, 1), &rat(3, 1), 64).unwrap();
        assert_eq!(e.certified_constant, Some(6.0));
        assert!(e.grid_quotient_max <= 6.0 + 1e-12);
        assert!(e.grid_quotient_max > 5.5);
        assert_eq!(e.lipschitz, Some(true));

        let a = ScalarMap::Affine { a: rat(-5, 2), b: rat(1, 3) };
        let e = estimate_lipschitz(&a, &rat(0, 1), &rat(1, 1), 16).unwrap();
        assert_eq!(e.certified_constant, Some(2.5));
        assert!((e.grid_quotient_max - 2.5).abs() < 1e-12);

        let e = estimate_lipschitz(&ScalarMap::SqrtAbs, &rat(0, 1), &rat(1, 1), 64).unwrap();
        assert_eq!(e.lipschitz, Some(false));
        assert!(e.grid_quotient_max > 4.0);
    }

    #[test]
    fn tabulated_interpolates_and_bounds_slope() {
        let t = ScalarMap::tabulated(vec![
            (rat(0, 1), rat(0, 1)),
            (rat(1, 1), rat(2, 1)),
            (rat(2, 1), rat(1, 1)),
        ])
        .unwrap();
        let v = t.apply_rat(&rat(1, 2), p2()).unwrap();
        assert_eq!(v.as_rational().unwrap(), rat(1, 1));
        let v = t.apply_rat(&rat(3, 2), p2()).unwrap();
        assert_eq!(v.as_rational().unwrap(), rat(3, 2));
        assert!(t.apply_rat(&rat(3, 1), p2()).is_err());
        let e = estimate_lipschitz(&t, &rat(0, 1), &rat(2, 1), 32).unwrap();
        assert_eq!(e.certified_constant, Some(2.0));
    }

    #[test]
    fn breaking_pairs_for_square_are_exact() {
        let pairs = find_breaking_pairs(&ScalarMap::Square, p1(), 16).unwrap();
        assert_eq!(pairs.len(), 16);
        for pair in &pairs {
            let h = (&pair.a - &pair.b).abs();
            assert!(h > rat(0, 1));
            assert!(h < rat(1, pair.n as i64));
            let stretch = (&pair.a * &pair.a - &pair.b * &pair.b).abs();
            assert!(stretch > rat_int(pair.n as i64) * &h);
        }
    }

    #[test]
    fn lipschitz_maps_admit_no_breaking_pairs_early() {
        // |phi(a)-phi(b)| = |a-b| can never exceed n|a-b| for n >= 1
        let r = find_breaking_pairs(&ScalarMap::Identity, p1(), 4);
        assert!(matches!(r, Err(Error::NoBreakingPair(1))));
    }

    #[test]
    fn sqrt_breaks_at_p_two() {
        let pairs = find_breaking_pairs(&ScalarMap::SqrtAbs, p2(), 8).unwrap();
        for pair in &pairs {
            // pairs hug the origin where the slope blows up
            assert!(pair.a.abs() <= rat(1, 1));
        }
    }

    #[test]
    fn counterexample_lp_stat_is_exactly_one_over_n() {
        let fam = build_counterexample(&ScalarMap::Square, p1(), 12).unwrap();
        let s = lp_stat(&fam, 12).unwrap();
        for (n, q) in &s.entries {
            assert_eq!(q.as_exact().unwrap(), &rat(1, *n as i64));
        }
    }

    #[test]
    fn counterexample_resists_every_small_witness_after_composition() {
        let map = ScalarMap::Square;
        let fam = build_counterexample(&map, p1(), 12).unwrap();
        let composed = map.compose_family(&fam);
        let half = rat(1, 2);
        for n in [1u32, 4, 12] {
            let f = composed.term(n).unwrap();
            let g = composed.limit_at(n).unwrap();
            let full = MeasurableSubset::full(f.domain().clone());
            let total = integrate_p(&f, &g, p1(), &full).unwrap();
            let (_, removable) = worst_small_set(&f, &g, p1(), &half).unwrap();
            let left = total.as_exact().unwrap() - removable.as_exact().unwrap();
            assert!(left > half, "n = {n}: best witness leaves {left}");
        }
    }

    #[test]
    fn identity_preserves_spike_verdicts() {
        let fam = gallery("spike", p2()).unwrap();
        let r = verify_preservation(
            &ScalarMap::Identity,
            &fam,
            64,
            &DecayCriterion::default(),
            &default_delta_grid(),
        )
        .unwrap();
        assert!(r.preserved);
        for m in [Mode::Lp, Mode::AlmostLp, Mode::AlphaP, Mode::Measure] {
            assert_eq!(
                report_for(&r.before, m).verdict,
                report_for(&r.after, m).verdict
            );
        }
    }

    #[test]
    fn square_destroys_the_counterexample() {
        let fam = build_counterexample(&ScalarMap::Square, p1(), 64).unwrap();
        let r = verify_preservation(
            &ScalarMap::Square,
            &fam,
            64,
            &DecayCriterion::default(),
            &default_delta_grid(),
        )
        .unwrap();
        assert!(!r.preserved);
        assert_eq!(
            report_for(&r.before, Mode::AlphaP).verdict,
            Verdict::CertifiedHolds
        );
        assert_eq!(
            report_for(&r.after, Mode::Measure).verdict,
            Verdict::CertifiedFailsAtHorizon
        );
    }
}
