//! Convergence statistics, certificates and three-valued verdicts.
//!
//! Every verdict is certified at a finite horizon: HOLDS and FAILS carry
//! a certificate (a decaying series, a failure floor, a witness report),
//! UNDETERMINED carries neither. Decay of a statistic series is judged by
//! a fixed criterion rather than eyeballing: either the whole final
//! window sits below the tolerance, or the final window has dropped to at
//! most half of the earlier maximum. Statistics that are exactly zero by
//! construction certify through the tolerance branch.

use num_traits::{Signed, Zero};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{integrate_p, superlevel_set, Domain, MeasurableSubset, SimpleFunction};
use crate::rational::{rat, rat_to_f64, Rat};
use crate::sequences::SequenceFamily;
use crate::value::{Exponent, Quantity};

/// A statistic indexed by n, with the parameters it was computed under.
#[derive(Clone, Debug)]
pub struct StatSeries {
    pub stat_name: String,
    pub p: f64,
    pub delta: Option<f64>,
    pub entries: Vec<(u32, Quantity)>,
}

impl StatSeries {
    fn new(stat_name: impl Into<String>, p: f64, delta: Option<f64>) -> Self {
        StatSeries {
            stat_name: stat_name.into(),
            p,
            delta,
            entries: Vec::new(),
        }
    }

    pub fn values_f64(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, q)| q.to_f64())
    }

    pub fn last(&self) -> Option<&Quantity> {
        self.entries.last().map(|(_, q)| q)
    }
}

/// Numerical surrogate for "tends to zero": the final `window_fraction`
/// of the series must sit below the tolerance, or must have dropped to at
/// most half of the maximum seen before the window.
#[derive(Clone, Copy, Debug)]
pub struct DecayCriterion {
    pub tolerance: f64,
    pub window_fraction: f64,
}

impl Default for DecayCriterion {
    fn default() -> Self {
        DecayCriterion {
            tolerance: 1e-9,
            window_fraction: 0.25,
        }
    }
}

impl DecayCriterion {
    pub fn new(tolerance: f64, window_fraction: f64) -> Result<Self> {
        if !(tolerance > 0.0) || !(window_fraction > 0.0 && window_fraction <= 1.0) {
            return Err(Error::BadConfig(
                "tolerance must be positive and window fraction in (0, 1]".into(),
            ));
        }
        Ok(DecayCriterion {
            tolerance,
            window_fraction,
        })
    }

    fn split<'a>(&self, series: &'a StatSeries) -> (&'a [(u32, Quantity)], &'a [(u32, Quantity)]) {
        let len = series.entries.len();
        let wlen = ((len as f64 * self.window_fraction).ceil() as usize).clamp(1, len);
        series.entries.split_at(len - wlen)
    }

    pub fn decays(&self, series: &StatSeries) -> bool {
        if series.entries.is_empty() {
            return false;
        }
        let (prefix, window) = self.split(series);
        let wmax = window
            .iter()
            .map(|(_, q)| q.to_f64())
            .fold(0.0f64, f64::max);
        if wmax <= self.tolerance {
            return true;
        }
        if prefix.is_empty() {
            return false;
        }
        let pmax = prefix
            .iter()
            .map(|(_, q)| q.to_f64())
            .fold(0.0f64, f64::max);
        wmax <= pmax / 2.0
    }

    /// Certified non-decay: the entire final window sits at or above
    /// ten times the tolerance.
    pub fn fails_floor(&self, series: &StatSeries) -> bool {
        if series.entries.is_empty() {
            return false;
        }
        let (_, window) = self.split(series);
        window
            .iter()
            .all(|(_, q)| q.to_f64() >= 10.0 * self.tolerance)
    }
}

/// Default threshold grid `{2^-6, 2^-4, 2^-2, 1}`.
pub fn default_delta_grid() -> Vec<Rat> {
    vec![rat(1, 64), rat(1, 16), rat(1, 4), rat(1, 1)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Lp,
    AlmostLp,
    AlphaP,
    Measure,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Lp => "Lp",
            Mode::AlmostLp => "almost_Lp",
            Mode::AlphaP => "alpha_p",
            Mode::Measure => "measure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CertifiedHolds,
    CertifiedFailsAtHorizon,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedHolds => "CERTIFIED_HOLDS",
            Verdict::CertifiedFailsAtHorizon => "CERTIFIED_FAILS_AT_HORIZON",
            Verdict::Undetermined => "UNDETERMINED",
        }
    }
}

/// Per-index witness data for an alpha-p certificate: the set, the exact
/// measure of its complement, and the trimmed integral over it.
#[derive(Clone, Debug)]
pub struct WitnessEntry {
    pub n: u32,
    pub set: MeasurableSubset,
    pub complement_measure: Rat,
    pub trimmed: Quantity,
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub p: f64,
    pub delta: Option<f64>,
    pub entries: Vec<WitnessEntry>,
}

impl WitnessReport {
    pub fn complement_series(&self) -> StatSeries {
        StatSeries {
            stat_name: "witness_complement_measure".into(),
            p: self.p,
            delta: self.delta,
            entries: self
                .entries
                .iter()
                .map(|e| (e.n, Quantity::Exact(e.complement_measure.clone())))
                .collect(),
        }
    }

    pub fn trimmed_series(&self) -> StatSeries {
        StatSeries {
            stat_name: "witness_trimmed_integral".into(),
            p: self.p,
            delta: self.delta,
            entries: self
                .entries
                .iter()
                .map(|e| (e.n, e.trimmed.clone()))
                .collect(),
        }
    }
}

/// Exceptional-set certificate for one delta of the almost-in-Lp mode.
#[derive(Clone, Debug)]
pub struct AlmostLpEntry {
    pub delta: f64,
    pub exceptional: MeasurableSubset,
    pub exceptional_measure: Rat,
    pub series: StatSeries,
}

#[derive(Clone, Debug)]
pub enum Certificate {
    None,
    Decay { series: StatSeries },
    Floor { series: StatSeries, floor: f64 },
    SupNormDecay { series: StatSeries },
    AlphaWitness { delta: f64, witness: WitnessReport },
    AlphaFailure { delta: f64, trimmed: StatSeries },
    AlmostLpSets { entries: Vec<AlmostLpEntry> },
    AlmostLpExhausted {
        delta0: f64,
        budgets: Vec<f64>,
        min_tail_sup: f64,
    },
    InheritedFrom { mode: Mode },
}

#[derive(Clone, Debug)]
pub struct ModeReport {
    pub mode: Mode,
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub horizon: u32,
    pub tolerance: f64,
}

fn full_set(f: &SimpleFunction) -> MeasurableSubset {
    MeasurableSubset::full(f.domain().clone())
}

fn terms_of(fam: &SequenceFamily, horizon: u32) -> Result<Vec<(SimpleFunction, SimpleFunction)>> {
    (1..=horizon)
        .map(|n| Ok((fam.term(n)?, fam.limit_at(n)?)))
        .collect()
}

/// `n -> int_X |f_n - f|^p dmu`.
pub fn lp_stat(fam: &SequenceFamily, horizon: u32) -> Result<StatSeries> {
    let terms = terms_of(fam, horizon)?;
    lp_stat_from(fam.p(), &terms)
}

fn lp_stat_from(p: Exponent, terms: &[(SimpleFunction, SimpleFunction)]) -> Result<StatSeries> {
    let mut s = StatSeries::new("lp", p.get(), None);
    for (i, (f, g)) in terms.iter().enumerate() {
        let q = integrate_p(f, g, p, &full_set(f))?;
        s.entries.push((i as u32 + 1, q));
    }
    Ok(s)
}

/// `n -> mu({ |f_n - f| >= delta })`.
pub fn deviation_stat(fam: &SequenceFamily, delta: &Rat, horizon: u32) -> Result<StatSeries> {
    let terms = terms_of(fam, horizon)?;
    deviation_stat_from(fam.p(), &terms, delta)
}

fn deviation_stat_from(
    p: Exponent,
    terms: &[(SimpleFunction, SimpleFunction)],
    delta: &Rat,
) -> Result<StatSeries> {
    let mut s = StatSeries::new("deviation", p.get(), Some(rat_to_f64(delta)));
    for (i, (f, g)) in terms.iter().enumerate() {
        let e = superlevel_set(f, g, delta, p)?;
        s.entries
            .push((i as u32 + 1, Quantity::Exact(e.measure())));
    }
    Ok(s)
}

/// `n -> int over the complement of the delta-superlevel set`.
pub fn trimmed_stat(fam: &SequenceFamily, delta: &Rat, horizon: u32) -> Result<StatSeries> {
    let terms = terms_of(fam, horizon)?;
    trimmed_stat_from(fam.p(), &terms, delta)
}

fn trimmed_stat_from(
    p: Exponent,
    terms: &[(SimpleFunction, SimpleFunction)],
    delta: &Rat,
) -> Result<StatSeries> {
    let mut s = StatSeries::new("trimmed", p.get(), Some(rat_to_f64(delta)));
    for (i, (f, g)) in terms.iter().enumerate() {
        let b = superlevel_set(f, g, delta, p)?.complement();
        let q = integrate_p(f, g, p, &b)?;
        s.entries.push((i as u32 + 1, q));
    }
    Ok(s)
}

/// `n -> sup_x |f_n - f|`, a float-valued trend diagnostic. A decaying
/// sup series certifies convergence in measure for every threshold at
/// once (uniform convergence dominates).
pub fn sup_stat(fam: &SequenceFamily, horizon: u32) -> Result<StatSeries> {
    let terms = terms_of(fam, horizon)?;
    sup_stat_from(fam.p(), &terms)
}

fn sup_stat_from(p: Exponent, terms: &[(SimpleFunction, SimpleFunction)]) -> Result<StatSeries> {
    let mut s = StatSeries::new("sup_abs_diff", p.get(), None);
    for (i, (f, g)) in terms.iter().enumerate() {
        s.entries
            .push((i as u32 + 1, Quantity::Approx(f.sup_abs_diff(g, p)?)));
    }
    Ok(s)
}

/// Canonical witness report at threshold delta: `B_n` is the complement
/// of the delta-superlevel set, paired with its complement measure and
/// the trimmed integral over it.
pub fn alpha_witness(fam: &SequenceFamily, delta: &Rat, horizon: u32) -> Result<WitnessReport> {
    let terms = terms_of(fam, horizon)?;
    alpha_witness_from(fam.p(), &terms, delta)
}

fn alpha_witness_from(
    p: Exponent,
    terms: &[(SimpleFunction, SimpleFunction)],
    delta: &Rat,
) -> Result<WitnessReport> {
    let mut entries = Vec::with_capacity(terms.len());
    for (i, (f, g)) in terms.iter().enumerate() {
        let set = superlevel_set(f, g, delta, p)?.complement();
        let complement_measure = set.complement().measure();
        let trimmed = integrate_p(f, g, p, &set)?;
        entries.push(WitnessEntry {
            n: i as u32 + 1,
            set,
            complement_measure,
            trimmed,
        });
    }
    Ok(WitnessReport {
        p: p.get(),
        delta: Some(rat_to_f64(delta)),
        entries,
    })
}

/// Family whose witness sets are the canonical `E_n^c(delta)`.
pub fn attach_alpha_witness(fam: &SequenceFamily, delta: &Rat) -> SequenceFamily {
    let inner = fam.clone();
    let delta = delta.clone();
    fam.clone().with_witness(Arc::new(move |n| {
        let f = inner.term(n)?;
        let g = inner.limit_at(n)?;
        Ok(superlevel_set(&f, &g, &delta, inner.p())?.complement())
    }))
}

/// Greedy exact maximiser of `int_D |f - g|^p` over `mu(D) <= budget`.
///
/// The p-th power density is constant on each refined cell, so taking
/// whole cells in decreasing density order and splitting the last one to
/// meet the budget exactly is optimal (fractional knapsack).
pub fn worst_small_set(
    f: &SimpleFunction,
    g: &SimpleFunction,
    p: Exponent,
    budget: &Rat,
) -> Result<(MeasurableSubset, Quantity)> {
    if budget.is_negative() || *budget > f.domain().length() {
        return Err(Error::BadBudget);
    }
    let (fine, pairs) = f.align(g)?;
    let mut cells: Vec<(usize, Rat, Rat, Quantity)> = Vec::new();
    for (i, ((lo, hi), (u, v))) in fine.cells().zip(pairs.iter()).enumerate() {
        let density = u.sub(v).abs_pow(p);
        cells.push((i, lo.clone(), hi.clone(), density));
    }
    // stable sort keeps least-index tie-breaking
    cells.sort_by(|a, b| b.3.partial_cmp(&a.3).unwrap_or(std::cmp::Ordering::Equal));
    let mut remaining = budget.clone();
    let mut total = Quantity::zero();
    let mut picked: Vec<(Rat, Rat)> = Vec::new();
    for (_, lo, hi, density) in cells {
        if remaining.is_zero() {
            break;
        }
        if density.is_zero() {
            break;
        }
        let len = &hi - &lo;
        if len <= remaining {
            remaining -= &len;
            total = total.add(&density.mul_rat(&len));
            picked.push((lo, hi));
        } else {
            let cut = &lo + &remaining;
            total = total.add(&density.mul_rat(&remaining));
            picked.push((lo, cut));
            remaining = Rat::zero();
        }
    }
    let set = MeasurableSubset::from_intervals(fine.domain().clone(), picked)?;
    Ok((set, total))
}

fn fixed_domain(terms: &[(SimpleFunction, SimpleFunction)]) -> Option<Domain> {
    let d = terms.first()?.0.domain().clone();
    if terms.iter().all(|(f, _)| f.domain() == &d) {
        Some(d)
    } else {
        None
    }
}

/// Constructive exceptional sets for the almost-in-Lp mode: tail
/// intersections of the canonical witness sets at the certifying delta,
/// cut at the first index whose complement is smaller than each grid
/// threshold.
fn almost_lp_constructive(
    p: Exponent,
    terms: &[(SimpleFunction, SimpleFunction)],
    alpha_delta: &Rat,
    grid: &[Rat],
    criterion: &DecayCriterion,
) -> Result<Option<Vec<AlmostLpEntry>>> {
    if fixed_domain(terms).is_none() {
        return Ok(None);
    }
    let mut witness_sets = Vec::with_capacity(terms.len());
    for (f, g) in terms {
        witness_sets.push(superlevel_set(f, g, alpha_delta, p)?.complement());
    }
    // tails[i] = intersection of witness sets from index i to the horizon
    let mut tails: Vec<MeasurableSubset> = vec![witness_sets.last().unwrap().clone()];
    for b in witness_sets.iter().rev().skip(1) {
        let next = b.intersect(tails.last().unwrap())?;
        tails.push(next);
    }
    tails.reverse();
    let mut entries = Vec::with_capacity(grid.len());
    for delta in grid {
        let mut chosen = None;
        for tail in &tails {
            let m = tail.complement().measure();
            if &m <= delta {
                chosen = Some((tail.clone(), m));
                break;
            }
        }
        let Some((tail, m)) = chosen else {
            return Ok(None);
        };
        let mut series = StatSeries::new("almost_lp_tail", p.get(), Some(rat_to_f64(delta)));
        for (i, (f, g)) in terms.iter().enumerate() {
            let q = integrate_p(f, g, p, &tail)?;
            series.entries.push((i as u32 + 1, q));
        }
        if !criterion.decays(&series) {
            return Ok(None);
        }
        entries.push(AlmostLpEntry {
            delta: rat_to_f64(delta),
            exceptional: tail.complement(),
            exceptional_measure: m,
            series,
        });
    }
    Ok(Some(entries))
}

/// Failure scan for the almost-in-Lp mode: candidate exceptional sets
/// of measure at most the smallest grid delta are assembled greedily
/// from the top-deviation cells of the final-window refinement, at a
/// ladder of dyadic budgets. The mode fails at the horizon when the
/// off-set statistic of every candidate refuses to decay; candidates
/// that leave only a decaying tail disqualify the certificate.
fn almost_lp_failure_scan(
    p: Exponent,
    terms: &[(SimpleFunction, SimpleFunction)],
    delta0: &Rat,
    criterion: &DecayCriterion,
) -> Result<Option<(Vec<f64>, f64)>> {
    let Some(domain) = fixed_domain(terms) else {
        return Ok(None);
    };
    let len = terms.len();
    let wlen = ((len as f64 * criterion.window_fraction).ceil() as usize).clamp(1, len);
    let window = &terms[len - wlen..];
    // refinement of the final-window differences
    let mut fine = window[0].0.partition().refine(window[0].1.partition())?;
    for (f, g) in window.iter().skip(1) {
        fine = fine.refine(f.partition())?;
        fine = fine.refine(g.partition())?;
    }
    if fine.cell_count() > 8192 {
        return Ok(None);
    }
    // score each cell by its worst deviation over the window
    let mut scored: Vec<(Rat, Rat, f64)> = fine
        .cells()
        .map(|(lo, hi)| (lo.clone(), hi.clone(), 0.0f64))
        .collect();
    for (f, g) in window {
        let (_, pairs) = f.align(g)?;
        let aligned = f.partition().refine(g.partition())?;
        for ((lo, hi), (u, v)) in aligned.cells().zip(pairs.iter()) {
            let d = u.sub(v).to_f64(p).abs();
            if d == 0.0 {
                continue;
            }
            for cell in scored.iter_mut() {
                if &cell.0 >= lo && &cell.1 <= hi && d > cell.2 {
                    cell.2 = d;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| {
        scored[b]
            .2
            .partial_cmp(&scored[a].2)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut budgets = Vec::new();
    let mut min_tail_sup = f64::INFINITY;
    for j in 0..=8u32 {
        let budget = delta0 / rat(1 << j, 1);
        budgets.push(rat_to_f64(&budget));
        let mut remaining = budget;
        let mut picked = Vec::new();
        for &i in &order {
            let (lo, hi, score) = &scored[i];
            if *score == 0.0 {
                break;
            }
            let l = hi - lo;
            if l <= remaining {
                remaining -= &l;
                picked.push((lo.clone(), hi.clone()));
            }
        }
        let exceptional = MeasurableSubset::from_intervals(domain.clone(), picked)?;
        let keep = exceptional.complement();
        let mut series = StatSeries::new("almost_lp_candidate", p.get(), None);
        for (i, (f, g)) in terms.iter().enumerate() {
            let q = integrate_p(f, g, p, &keep)?;
            series.entries.push((i as u32 + 1, q));
        }
        if criterion.decays(&series) {
            return Ok(None);
        }
        let (_, win) = criterion.split(&series);
        let tail_sup = win.iter().map(|(_, q)| q.to_f64()).fold(0.0f64, f64::max);
        min_tail_sup = min_tail_sup.min(tail_sup);
        if tail_sup < 10.0 * criterion.tolerance {
            // not decaying yet not certifiably large either
            return Ok(None);
        }
    }
    Ok(Some((budgets, min_tail_sup)))
}

/// The four-mode verdict at a horizon, with certificates, honoring the
/// implication chain Lp => almost-in-Lp => alpha-p => in-measure.
pub fn verdict(
    fam: &SequenceFamily,
    horizon: u32,
    criterion: &DecayCriterion,
    delta_grid: &[Rat],
) -> Result<Vec<ModeReport>> {
    if horizon < 8 {
        return Err(Error::BadConfig("horizon must be at least 8".into()));
    }
    if delta_grid.is_empty() {
        return Err(Error::BadConfig("delta grid must be nonempty".into()));
    }
    if delta_grid.iter().any(|d| !d.is_positive()) {
        return Err(Error::BadConfig("delta grid must be positive".into()));
    }
    let mut grid = delta_grid.to_vec();
    grid.sort();
    let p = fam.p();
    let terms = terms_of(fam, horizon)?;

    let lp = lp_stat_from(p, &terms)?;
    let sup = sup_stat_from(p, &terms)?;
    let mut dev = Vec::with_capacity(grid.len());
    let mut trim = Vec::with_capacity(grid.len());
    for d in &grid {
        dev.push(deviation_stat_from(p, &terms, d)?);
        trim.push(trimmed_stat_from(p, &terms, d)?);
    }

    // Lp
    let lp_report = if criterion.decays(&lp) {
        (Verdict::CertifiedHolds, Certificate::Decay { series: lp.clone() })
    } else if criterion.fails_floor(&lp) {
        (
            Verdict::CertifiedFailsAtHorizon,
            Certificate::Floor {
                series: lp.clone(),
                floor: 10.0 * criterion.tolerance,
            },
        )
    } else {
        (Verdict::Undetermined, Certificate::None)
    };

    // measure: per-threshold decay for the whole grid, or a decaying
    // sup-norm series (uniform convergence dominates every threshold)
    let all_dev_decay = dev.iter().all(|s| criterion.decays(s));
    let sup_decays = criterion.decays(&sup);
    let measure_report = if all_dev_decay {
        (
            Verdict::CertifiedHolds,
            Certificate::Decay {
                series: dev.last().unwrap().clone(),
            },
        )
    } else if sup_decays {
        (
            Verdict::CertifiedHolds,
            Certificate::SupNormDecay { series: sup.clone() },
        )
    } else if let Some(i) = dev.iter().position(|s| criterion.fails_floor(s)) {
        (
            Verdict::CertifiedFailsAtHorizon,
            Certificate::Floor {
                series: dev[i].clone(),
                floor: 10.0 * criterion.tolerance,
            },
        )
    } else {
        (Verdict::Undetermined, Certificate::None)
    };

    // alpha-p: a threshold certifies when it yields a valid witness,
    // i.e. both the complement measures (= deviation) and the trimmed
    // integrals decay at that same threshold.
    let witness_valid: Vec<bool> = (0..grid.len())
        .map(|i| criterion.decays(&dev[i]) && criterion.decays(&trim[i]))
        .collect();
    let measure_holds = measure_report.0 == Verdict::CertifiedHolds;
    let alpha_report = if measure_holds {
        if let Some(i) = witness_valid.iter().position(|&v| v) {
            let witness = alpha_witness_from(p, &terms, &grid[i])?;
            (
                Verdict::CertifiedHolds,
                Certificate::AlphaWitness {
                    delta: rat_to_f64(&grid[i]),
                    witness,
                },
            )
        } else if let Some(i) = (0..grid.len())
            .find(|&i| criterion.decays(&dev[i]) && criterion.fails_floor(&trim[i]))
        {
            // threshold-independence: once in measure, one settled
            // threshold with a floored trimmed series sinks them all
            (
                Verdict::CertifiedFailsAtHorizon,
                Certificate::AlphaFailure {
                    delta: rat_to_f64(&grid[i]),
                    trimmed: trim[i].clone(),
                },
            )
        } else {
            (Verdict::Undetermined, Certificate::None)
        }
    } else if measure_report.0 == Verdict::CertifiedFailsAtHorizon {
        (
            Verdict::CertifiedFailsAtHorizon,
            Certificate::InheritedFrom { mode: Mode::Measure },
        )
    } else {
        (Verdict::Undetermined, Certificate::None)
    };

    // almost in Lp
    let almost_report = {
        let alpha_delta = witness_valid
            .iter()
            .position(|&v| v)
            .map(|i| grid[i].clone());
        let constructed = match (&alpha_delta, measure_holds) {
            (Some(d), true) => almost_lp_constructive(p, &terms, d, &grid, criterion)?,
            _ => None,
        };
        if let Some(entries) = constructed {
            (
                Verdict::CertifiedHolds,
                Certificate::AlmostLpSets { entries },
            )
        } else if alpha_report.0 == Verdict::CertifiedFailsAtHorizon {
            (
                Verdict::CertifiedFailsAtHorizon,
                Certificate::InheritedFrom { mode: Mode::AlphaP },
            )
        } else if let Some((budgets, min_tail_sup)) =
            almost_lp_failure_scan(p, &terms, &grid[0], criterion)?
        {
            (
                Verdict::CertifiedFailsAtHorizon,
                Certificate::AlmostLpExhausted {
                    delta0: rat_to_f64(&grid[0]),
                    budgets,
                    min_tail_sup,
                },
            )
        } else {
            (Verdict::Undetermined, Certificate::None)
        }
    };

    let mut reports = vec![
        ModeReport {
            mode: Mode::Lp,
            verdict: lp_report.0,
            certificate: lp_report.1,
            horizon,
            tolerance: criterion.tolerance,
        },
        ModeReport {
            mode: Mode::AlmostLp,
            verdict: almost_report.0,
            certificate: almost_report.1,
            horizon,
            tolerance: criterion.tolerance,
        },
        ModeReport {
            mode: Mode::AlphaP,
            verdict: alpha_report.0,
            certificate: alpha_report.1,
            horizon,
            tolerance: criterion.tolerance,
        },
        ModeReport {
            mode: Mode::Measure,
            verdict: measure_report.0,
            certificate: measure_report.1,
            horizon,
            tolerance: criterion.tolerance,
        },
    ];
    reconcile_lattice(&mut reports);
    Ok(reports)
}

/// Enforces the implication chain on the four reports: HOLDS propagates
/// from stronger to weaker modes, FAILS from weaker to stronger. A
/// direct contradiction (which no sound certificate pair can produce)
/// degrades both sides to UNDETERMINED.
fn reconcile_lattice(reports: &mut [ModeReport]) {
    // reports are ordered strongest to weakest: Lp, almost, alpha, measure
    for i in 0..reports.len() {
        if reports[i].verdict == Verdict::CertifiedHolds {
            let from = reports[i].mode;
            for weaker in reports.iter_mut().skip(i + 1) {
                if weaker.verdict == Verdict::Undetermined {
                    weaker.verdict = Verdict::CertifiedHolds;
                    weaker.certificate = Certificate::InheritedFrom { mode: from };
                }
            }
        }
    }
    for i in (0..reports.len()).rev() {
        if reports[i].verdict == Verdict::CertifiedFailsAtHorizon {
            let from = reports[i].mode;
            for stronger in reports.iter_mut().take(i) {
                match stronger.verdict {
                    Verdict::Undetermined => {
                        stronger.verdict = Verdict::CertifiedFailsAtHorizon;
                        stronger.certificate = Certificate::InheritedFrom { mode: from };
                    }
                    Verdict::CertifiedHolds => {
                        // unreachable with sound certificates
                        stronger.verdict = Verdict::Undetermined;
                        stronger.certificate = Certificate::None;
                    }
                    Verdict::CertifiedFailsAtHorizon => {}
                }
            }
        }
    }
}

pub fn report_for(reports: &[ModeReport], mode: Mode) -> &ModeReport {
    reports
        .iter()
        .find(|r| r.mode == mode)
        .expect("verdict always emits all four modes")
}

/// Output of the subsequence construction that upgrades an alpha-p
/// witness sequence to a single exceptional set per threshold.
#[derive(Clone, Debug)]
pub struct SubsequenceExtraction {
    pub indices: Vec<u32>,
    pub tail_sets: Vec<MeasurableSubset>,
    pub tail_complement_measures: Vec<Rat>,
    pub trimmed: Vec<Quantity>,
    pub exceptional: Option<MeasurableSubset>,
    pub exhausted_at: Option<u32>,
}

/// Picks `k_n` as the least fresh index whose witness complement is
/// below `2^-n`, forms the horizon-truncated tail intersections
/// `C_n`, and returns the exceptional set for the requested delta.
pub fn extract_almost_lp_subsequence(
    fam: &SequenceFamily,
    horizon: u32,
    delta: &Rat,
) -> Result<SubsequenceExtraction> {
    let mut indices = Vec::new();
    let mut witness_sets = Vec::new();
    let mut exhausted_at = None;
    let mut next = 1u32;
    let mut n = 1u32;
    loop {
        let mut found = None;
        let mut k = next;
        let threshold = rat(1, 1i64 << n.min(62));
        while k <= horizon {
            let b = fam.witness_at(k)?;
            if b.complement().measure() < threshold {
                found = Some((k, b));
                break;
            }
            k += 1;
        }
        match found {
            Some((k, b)) => {
                indices.push(k);
                witness_sets.push(b);
                next = k + 1;
                n += 1;
                if n > 62 || next > horizon {
                    break;
                }
            }
            None => {
                exhausted_at = Some(n);
                break;
            }
        }
    }
    if indices.is_empty() {
        return Ok(SubsequenceExtraction {
            indices,
            tail_sets: Vec::new(),
            tail_complement_measures: Vec::new(),
            trimmed: Vec::new(),
            exceptional: None,
            exhausted_at,
        });
    }
    let mut tails: Vec<MeasurableSubset> = vec![witness_sets.last().unwrap().clone()];
    for b in witness_sets.iter().rev().skip(1) {
        let t = b.intersect(tails.last().unwrap())?;
        tails.push(t);
    }
    tails.reverse();
    let mut measures = Vec::with_capacity(tails.len());
    let mut trimmed = Vec::with_capacity(tails.len());
    for (i, tail) in tails.iter().enumerate() {
        measures.push(tail.complement().measure());
        let k = indices[i];
        let f = fam.term(k)?;
        let g = fam.limit_at(k)?;
        trimmed.push(integrate_p(&f, &g, fam.p(), tail)?);
    }
    let exceptional = tails
        .iter()
        .zip(measures.iter())
        .find(|(_, m)| *m <= delta)
        .map(|(t, _)| t.complement());
    Ok(SubsequenceExtraction {
        indices,
        tail_sets: tails,
        tail_complement_measures: measures,
        trimmed,
        exceptional,
        exhausted_at,
    })
}

/// `max over tail pairs of int_{B_n cap B_m} |f_n - f_m|^p dmu`.
pub fn cauchy_stat(fam: &SequenceFamily, horizon: u32, tail_start: u32) -> Result<Quantity> {
    if tail_start > horizon {
        return Err(Error::BadConfig("tail start beyond horizon".into()));
    }
    let p = fam.p();
    let mut worst = Quantity::zero();
    for n in tail_start..=horizon {
        let fn_ = fam.term(n)?;
        let bn = fam.witness_at(n)?;
        for m in (n + 1)..=horizon {
            let fm = fam.term(m)?;
            let bm = fam.witness_at(m)?;
            let q = integrate_p(&fn_, &fm, p, &bn.intersect(&bm)?)?;
            if q > worst {
                worst = q;
            }
        }
    }
    Ok(worst)
}

/// Result of the completeness pipeline: the candidate limit realized as
/// the last extracted term, the worst cellwise oscillation observed over
/// the stabilized tail region, and the alpha-p verdict of the family
/// against the candidate.
#[derive(Clone, Debug)]
pub struct CompletionReport {
    pub candidate: SimpleFunction,
    pub extracted: Vec<u32>,
    pub max_oscillation: f64,
    pub stabilized: bool,
    pub reports: Vec<ModeReport>,
}

/// Cauchy-to-limit pipeline: check the pairwise tail statistic, extract
/// the fast subsequence, realize the candidate limit as the stabilized
/// tail value, and certify the family against it.
pub fn complete_limit(
    fam: &SequenceFamily,
    horizon: u32,
    criterion: &DecayCriterion,
    delta_grid: &[Rat],
) -> Result<CompletionReport> {
    let p = fam.p();
    let tail_start = (horizon as f64 * (1.0 - criterion.window_fraction)).ceil() as u32;
    let tail_start = tail_start.clamp(1, horizon);
    let cauchy = cauchy_stat(fam, horizon, tail_start)?;
    if cauchy.to_f64() > criterion.tolerance {
        return Err(Error::NotCauchy);
    }
    // fast subsequence as in the witness-to-exceptional-set construction
    let mut indices = Vec::new();
    let mut witness_sets: Vec<MeasurableSubset> = Vec::new();
    let mut next = 1u32;
    let mut n = 1u32;
    while next <= horizon && n <= 62 {
        let threshold = rat(1, 1i64 << n);
        let mut found = None;
        let mut k = next;
        while k <= horizon {
            let b = fam.witness_at(k)?;
            if b.complement().measure() < threshold {
                found = Some((k, b));
                break;
            }
            k += 1;
        }
        let Some((k, b)) = found else { break };
        indices.push(k);
        witness_sets.push(b);
        next = k + 1;
        n += 1;
    }
    if indices.is_empty() {
        return Err(Error::NotCauchy);
    }
    let last_index = *indices.last().unwrap();
    let candidate = fam.term(last_index)?;
    // tail intersections C_n
    let mut tails: Vec<MeasurableSubset> = vec![witness_sets.last().unwrap().clone()];
    for b in witness_sets.iter().rev().skip(1) {
        let t = b.intersect(tails.last().unwrap())?;
        tails.push(t);
    }
    tails.reverse();
    // cellwise oscillation against the candidate over stabilized cells:
    // only the final window of extracted terms is consulted, and a cell
    // participates only when the tail set at that stage contains it
    let mut max_osc = 0.0f64;
    let wlen = ((indices.len() as f64 * criterion.window_fraction).ceil() as usize)
        .clamp(1, indices.len());
    let start = indices.len() - wlen;
    for (i, &k) in indices.iter().enumerate().skip(start) {
        let f = fam.term(k)?;
        let (fine, pairs) = f.align(&candidate)?;
        for ((lo, hi), (u, v)) in fine.cells().zip(pairs.iter()) {
            let len = hi - lo;
            let inside = tails[i].overlap_length(lo, hi) == len;
            if inside {
                let osc = u.sub(v).to_f64(p).abs();
                if osc > max_osc {
                    max_osc = osc;
                }
            }
        }
    }
    let stabilized = max_osc <= criterion.tolerance;
    let with_limit = fam.clone().with_limit({
        let c = candidate.clone();
        Arc::new(move |_| Ok(c.clone()))
    });
    let reports = verdict(&with_limit, horizon, criterion, delta_grid)?;
    Ok(CompletionReport {
        candidate,
        extracted: indices,
        max_oscillation: max_osc,
        stabilized,
        reports,
    })
}

/// Diagonal selection across a family of families.
#[derive(Clone, Debug)]
pub struct DiagonalSelection {
    pub selection: Vec<(u32, Option<u32>)>,
    pub composite_complements: Vec<Rat>,
    pub composite_trimmed: Vec<Quantity>,
    pub verdict: Verdict,
}

/// For each n picks the least `k >= n` whose inner trimmed integral is
/// below `2^-n`, intersects the outer and inner witnesses, and checks
/// that the diagonal sequence alpha-converges to the outer limit.
pub fn diagonal_select(
    outer: &SequenceFamily,
    inner: &dyn Fn(u32) -> Result<SequenceFamily>,
    horizon: u32,
    criterion: &DecayCriterion,
) -> Result<DiagonalSelection> {
    let p = outer.p();
    let mut selection = Vec::with_capacity(horizon as usize);
    let mut complements = Vec::new();
    let mut trimmed = Vec::new();
    let mut complete = true;
    for n in 1..=horizon {
        let fam_n = inner(n)?;
        let bound = rat(1, 1i64 << n.min(62));
        let mut chosen = None;
        for k in n..=horizon {
            let d = fam_n.witness_at(k)?;
            let q = integrate_p(&fam_n.term(k)?, &fam_n.limit_at(k)?, p, &d)?;
            if q.to_f64() < rat_to_f64(&bound) {
                chosen = Some(k);
                break;
            }
        }
        selection.push((n, chosen));
        match chosen {
            Some(k) => {
                let composite = outer.witness_at(n)?.intersect(&fam_n.witness_at(k)?)?;
                complements.push(composite.complement().measure());
                let diag_term = fam_n.term(k)?;
                let limit = outer.limit_at(n)?;
                trimmed.push(integrate_p(&diag_term, &limit, p, &composite)?);
            }
            None => {
                complete = false;
            }
        }
    }
    let verdict = if complete {
        let mk = |name: &str, vals: Vec<Quantity>| StatSeries {
            stat_name: name.into(),
            p: p.get(),
            delta: None,
            entries: vals
                .into_iter()
                .enumerate()
                .map(|(i, q)| (i as u32 + 1, q))
                .collect(),
        };
        let comp_series = mk(
            "composite_complement",
            complements
                .iter()
                .map(|m| Quantity::Exact(m.clone()))
                .collect(),
        );
        let trim_series = mk("composite_trimmed", trimmed.clone());
        if criterion.decays(&comp_series) && criterion.decays(&trim_series) {
            Verdict::CertifiedHolds
        } else {
            Verdict::Undetermined
        }
    } else {
        Verdict::Undetermined
    };
    Ok(DiagonalSelection {
        selection,
        composite_complements: complements,
        composite_trimmed: trimmed,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Partition;
    use crate::rational::{rat_int, rat_pow};
    use crate::sequences::gallery;
    use crate::value::Value;
    use num_traits::One;
    use proptest::prelude::*;

    fn p2() -> Exponent {
        Exponent::new(2.0).unwrap()
    }

    fn crit() -> DecayCriterion {
        DecayCriterion::default()
    }

    fn verdict_of(reports: &[ModeReport], mode: Mode) -> Verdict {
        report_for(reports, mode).verdict
    }

    #[test]
    fn lp_stat_is_exactly_one_for_spike() {
        let fam = gallery("spike", p2()).unwrap();
        let s = lp_stat(&fam, 20).unwrap();
        for (_, q) in &s.entries {
            assert_eq!(q.as_exact().unwrap(), &rat_int(1));
        }
    }

    #[test]
    fn lp_stat_vanishes_for_constant() {
        let fam = gallery("constant", p2()).unwrap();
        let s = lp_stat(&fam, 20).unwrap();
        assert!(s.entries.iter().all(|(_, q)| q.is_zero()));
    }

    #[test]
    fn deviation_stat_spike_is_reciprocal() {
        let fam = gallery("spike", p2()).unwrap();
        let s = deviation_stat(&fam, &rat(1, 1), 20).unwrap();
        for (n, q) in &s.entries {
            assert_eq!(q.as_exact().unwrap(), &rat(1, *n as i64));
        }
    }

    #[test]
    fn deviation_stat_typewriter_is_block_length() {
        let fam = gallery("typewriter", p2()).unwrap();
        let s = deviation_stat(&fam, &rat(1, 1), 40).unwrap();
        for (n, q) in &s.entries {
            let k = 31 - n.leading_zeros();
            assert_eq!(q.as_exact().unwrap(), &rat(1, 1i64 << k));
        }
    }

    #[test]
    fn trimmed_stat_spike_is_zero_and_spread_settles_at_one() {
        let spike = gallery("spike", p2()).unwrap();
        let s = trimmed_stat(&spike, &rat(1, 1), 20).unwrap();
        assert!(s.entries.iter().all(|(_, q)| q.is_zero()));

        let spread = gallery("spread", p2()).unwrap();
        let t = trimmed_stat(&spread, &rat(1, 4), 40).unwrap();
        // once n^{-1/2} drops below 1/4 nothing is trimmed away
        for (n, q) in &t.entries {
            if *n > 16 {
                assert_eq!(q.as_exact().unwrap(), &rat_int(1));
            } else {
                assert!(q.is_zero());
            }
        }
    }

    #[test]
    fn decay_criterion_branches() {
        let c = crit();
        let mk = |vals: &[f64]| StatSeries {
            stat_name: "t".into(),
            p: 2.0,
            delta: None,
            entries: vals
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u32 + 1, Quantity::Approx(v)))
                .collect(),
        };
        let zeros = mk(&[0.0; 16]);
        assert!(c.decays(&zeros));
        let halving: Vec<f64> = (0..16).map(|i| 1.0 / (1 << i) as f64).collect();
        assert!(c.decays(&mk(&halving)));
        let flat = mk(&[1.0; 16]);
        assert!(!c.decays(&flat));
        assert!(c.fails_floor(&flat));
        let late_bump: Vec<f64> = (0..16).map(|i| if i < 12 { 0.0 } else { 1.0 }).collect();
        assert!(!c.decays(&mk(&late_bump)));
    }

    #[test]
    fn worst_small_set_on_spike() {
        let fam = gallery("spike", p2()).unwrap();
        let f = fam.term(9).unwrap();
        let g = fam.limit_at(9).unwrap();
        // density 9 on [0, 1/9), budget below the support: value = 9 * budget
        let (set, v) = worst_small_set(&f, &g, p2(), &rat(1, 100)).unwrap();
        assert_eq!(set.measure(), rat(1, 100));
        assert_eq!(v.as_exact().unwrap(), &rat(9, 100));
        // budget beyond the support captures everything
        let (_, v) = worst_small_set(&f, &g, p2(), &rat(1, 2)).unwrap();
        assert_eq!(v.as_exact().unwrap(), &rat_int(1));
        assert!(worst_small_set(&f, &g, p2(), &rat(3, 2)).is_err());
    }

    #[test]
    fn gallery_verdicts_match_the_expected_table() {
        use Verdict::*;
        let grid = default_delta_grid();
        let expect = [
            ("spike", [CertifiedFailsAtHorizon, CertifiedHolds, CertifiedHolds, CertifiedHolds]),
            ("spread", [CertifiedFailsAtHorizon, CertifiedFailsAtHorizon, CertifiedFailsAtHorizon, CertifiedHolds]),
            ("typewriter", [CertifiedFailsAtHorizon, CertifiedFailsAtHorizon, CertifiedHolds, CertifiedHolds]),
            ("constant", [CertifiedHolds, CertifiedHolds, CertifiedHolds, CertifiedHolds]),
        ];
        for (name, want) in expect {
            let fam = gallery(name, p2()).unwrap();
            let reports = verdict(&fam, 256, &crit(), &grid).unwrap();
            let got = [
                verdict_of(&reports, Mode::Lp),
                verdict_of(&reports, Mode::AlmostLp),
                verdict_of(&reports, Mode::AlphaP),
                verdict_of(&reports, Mode::Measure),
            ];
            assert_eq!(got, want, "family {name}");
        }
    }

    #[test]
    fn spread_measure_holds_via_sup_norm() {
        let fam = gallery("spread", p2()).unwrap();
        let reports = verdict(&fam, 256, &crit(), &default_delta_grid()).unwrap();
        match &report_for(&reports, Mode::Measure).certificate {
            Certificate::SupNormDecay { .. } => {}
            other => panic!("expected sup-norm certificate, got {other:?}"),
        }
    }

    #[test]
    fn spike_alpha_certificate_carries_shrinking_witnesses() {
        let fam = gallery("spike", p2()).unwrap();
        let reports = verdict(&fam, 256, &crit(), &default_delta_grid()).unwrap();
        match &report_for(&reports, Mode::AlphaP).certificate {
            Certificate::AlphaWitness { witness, .. } => {
                for e in &witness.entries {
                    assert_eq!(e.complement_measure, rat(1, e.n as i64));
                    assert!(e.trimmed.is_zero());
                }
            }
            other => panic!("expected witness certificate, got {other:?}"),
        }
    }

    #[test]
    fn extraction_on_spike_witnesses() {
        let fam = gallery("spike", p2()).unwrap();
        let ex = extract_almost_lp_subsequence(&fam, 256, &rat(1, 100)).unwrap();
        assert_eq!(ex.indices, vec![3, 5, 9, 17, 33, 65, 129]);
        assert_eq!(ex.exhausted_at, Some(8));
        for (i, m) in ex.tail_complement_measures.iter().enumerate() {
            assert_eq!(m, &rat(1, ex.indices[i] as i64));
        }
        assert!(ex.trimmed.iter().all(|q| q.is_zero()));
        assert_eq!(ex.exceptional.unwrap().measure(), rat(1, 129));
    }

    #[test]
    fn spike_is_alpha_cauchy() {
        let fam = gallery("spike", p2()).unwrap();
        let q = cauchy_stat(&fam, 64, 1).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn complete_limit_recovers_geometric_tail() {
        // f_n = (1 - 2^-n) on [0,1], full witnesses
        let p = p2();
        let fam = SequenceFamily::new(
            "geometric",
            p,
            Arc::new(|n| {
                let c = Rat::one() - rat(1, 1i64 << n.min(62));
                Ok(SimpleFunction::constant(Domain::unit(), Value::from_rat(c)))
            }),
            None,
            None,
        )
        .with_witness(Arc::new(|_| Ok(MeasurableSubset::full(Domain::unit()))));
        let out = complete_limit(&fam, 64, &crit(), &default_delta_grid()).unwrap();
        assert!(out.stabilized, "max oscillation {}", out.max_oscillation);
        let truth = SimpleFunction::constant(Domain::unit(), Value::from_rat(Rat::one()));
        let err = integrate_p(&out.candidate, &truth, p, &MeasurableSubset::full(Domain::unit()))
            .unwrap();
        assert!(err.to_f64() < 1e-9);
        assert_eq!(
            verdict_of(&out.reports, Mode::AlphaP),
            Verdict::CertifiedHolds
        );
    }

    #[test]
    fn complete_limit_on_recentered_spike_stabilizes_off_supports() {
        // f_n = 2 + spike_n: candidate agrees with the constant 2 away
        // from the last shrinking support
        let p = p2();
        let spike = gallery("spike", p).unwrap();
        let fam = SequenceFamily::new(
            "recentered",
            p,
            Arc::new(move |n| {
                let s = spike.term(n)?;
                let c = SimpleFunction::constant(Domain::unit(), Value::from_int(2));
                s.linear(&Rat::one(), &c, &Rat::one())
            }),
            None,
            None,
        )
        .with_witness(Arc::new(|n| {
            MeasurableSubset::interval(Domain::unit(), rat(1, n as i64), Rat::one())
        }));
        let out = complete_limit(&fam, 256, &crit(), &default_delta_grid()).unwrap();
        assert!(out.stabilized);
        assert_eq!(*out.extracted.last().unwrap(), 129);
        let two = Value::from_int(2);
        assert_eq!(out.candidate.value_at(&rat(1, 2)).unwrap(), &two);
        assert_eq!(out.candidate.value_at(&rat(1, 100)).unwrap(), &two);
        assert_ne!(out.candidate.value_at(&rat(1, 200)).unwrap(), &two);
        assert_eq!(
            verdict_of(&out.reports, Mode::AlphaP),
            Verdict::CertifiedHolds
        );
    }

    #[test]
    fn diagonal_select_on_shifted_spikes() {
        // outer: f_n = spike_n; inner n: f_{n,k} = spike_n + spike_k / k
        let p = p2();
        let spike = gallery("spike", p).unwrap();
        let outer = spike.clone();
        let inner_spike = spike.clone();
        let inner = move |n: u32| -> Result<SequenceFamily> {
            let base = inner_spike.term(n)?;
            let s = inner_spike.clone();
            let limit = base.clone();
            Ok(SequenceFamily::new(
                "inner",
                p,
                Arc::new(move |k| {
                    let bump = s.term(k)?;
                    base.linear(&Rat::one(), &bump, &rat(1, k as i64))
                }),
                None,
                None,
            )
            .with_limit(Arc::new(move |_| Ok(limit.clone())))
            .with_witness(Arc::new(|k| {
                MeasurableSubset::interval(Domain::unit(), rat(1, k as i64), Rat::one())
            })))
        };
        let sel = diagonal_select(&outer, &inner, 64, &crit()).unwrap();
        assert!(sel.selection.iter().all(|(_, k)| k.is_some()));
        assert_eq!(sel.verdict, Verdict::CertifiedHolds);
        assert!(sel.composite_trimmed.iter().all(|q| q.is_zero()));
    }

    fn random_pair(values: &[i32]) -> (SimpleFunction, SimpleFunction) {
        let level = values.len().next_power_of_two().trailing_zeros();
        let part = Partition::dyadic(Domain::unit(), level);
        let n = part.cell_count();
        let f = SimpleFunction::new(
            part.clone(),
            (0..n)
                .map(|i| Value::from_rat(rat(values[i % values.len()] as i64, 8)))
                .collect(),
        )
        .unwrap();
        let g = SimpleFunction::zero(Domain::unit());
        (f, g)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn chebyshev_inequality_exact(values in proptest::collection::vec(-20i32..20, 1..8),
                                      dnum in 1i64..8) {
            let (f, g) = random_pair(&values);
            let delta = rat(dnum, 8);
            let e = superlevel_set(&f, &g, &delta, p2()).unwrap();
            let total = integrate_p(&f, &g, p2(), &MeasurableSubset::full(Domain::unit())).unwrap();
            let lhs = rat_pow(&delta, 2) * e.measure();
            prop_assert!(&lhs <= total.as_exact().unwrap());
        }

        #[test]
        fn trimmed_monotone_in_threshold(values in proptest::collection::vec(-20i32..20, 1..8)) {
            let (f, g) = random_pair(&values);
            let mut prev: Option<Rat> = None;
            for d in default_delta_grid() {
                let b = superlevel_set(&f, &g, &d, p2()).unwrap().complement();
                let t = integrate_p(&f, &g, p2(), &b).unwrap().as_exact().unwrap().clone();
                if let Some(p) = prev {
                    prop_assert!(p <= t);
                }
                prev = Some(t);
            }
        }

        #[test]
        fn worst_small_set_beats_arbitrary_candidates(
            values in proptest::collection::vec(-20i32..20, 1..8),
            mask in 0u32..256,
            bnum in 1i64..8,
        ) {
            let (f, g) = random_pair(&values);
            let budget = rat(bnum, 8);
            let (_, best) = worst_small_set(&f, &g, p2(), &budget).unwrap();
            // candidate: masked union of dyadic cells, trimmed to the budget
            let part = Partition::dyadic(Domain::unit(), 3);
            let mut picked = Vec::new();
            let mut remaining = budget.clone();
            for (i, (lo, hi)) in part.cells().enumerate() {
                if mask & (1 << i) == 0 || remaining.is_zero() {
                    continue;
                }
                let len = hi - lo;
                if len <= remaining {
                    remaining -= &len;
                    picked.push((lo.clone(), hi.clone()));
                } else {
                    picked.push((lo.clone(), lo + &remaining));
                    remaining = Rat::zero();
                }
            }
            let cand = MeasurableSubset::from_intervals(Domain::unit(), picked).unwrap();
            let v = integrate_p(&f, &g, p2(), &cand).unwrap();
            prop_assert!(v <= best);
        }
    }
}
