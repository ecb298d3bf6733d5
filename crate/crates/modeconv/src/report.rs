//! Report serialization (JSON and CSV) and family specs read from JSON.
//!
//! Exact rationals travel as `"num/den"` strings in JSON; CSV value
//! columns are decimal, since a column of `1/3`-style literals defeats
//! the point of a spreadsheet-friendly format.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::measure::{Domain, MeasurableSubset, Partition, SimpleFunction};
use crate::modes::{Certificate, ModeReport, StatSeries, WitnessReport};
use crate::preservation::{LipschitzEstimate, PreservationReport};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::relaxation::{RelaxSample, RelaxationRun};
use crate::sequences::SequenceFamily;
use crate::value::{Exponent, Quantity, Value};

pub const SCHEMA: &str = "modeconv/1";

fn rat_json(r: &Rat) -> Json {
    Json::String(format_rat(r))
}

fn quantity_json(q: &Quantity) -> Json {
    match q {
        Quantity::Exact(r) => json!({ "exact": format_rat(r), "value": q.to_f64() }),
        Quantity::Approx(x) => json!({ "value": x }),
    }
}

pub fn stat_series_json(s: &StatSeries) -> Json {
    json!({
        "stat_name": s.stat_name,
        "p": s.p,
        "delta": s.delta,
        "entries": s.entries.iter()
            .map(|(n, q)| json!({ "n": n, "value": quantity_json(q) }))
            .collect::<Vec<_>>(),
    })
}

pub fn subset_json(s: &MeasurableSubset) -> Json {
    json!({
        "intervals": s.intervals().iter()
            .map(|(lo, hi)| json!([format_rat(lo), format_rat(hi)]))
            .collect::<Vec<_>>(),
        "measure": format_rat(&s.measure()),
    })
}

pub fn witness_report_json(w: &WitnessReport) -> Json {
    json!({
        "p": w.p,
        "delta": w.delta,
        "entries": w.entries.iter().map(|e| json!({
            "n": e.n,
            "set": subset_json(&e.set),
            "complement_measure": format_rat(&e.complement_measure),
            "trimmed": quantity_json(&e.trimmed),
        })).collect::<Vec<_>>(),
    })
}

fn certificate_json(c: &Certificate) -> Json {
    match c {
        Certificate::None => json!({ "type": "none" }),
        Certificate::Decay { series } => json!({
            "type": "decay",
            "series": stat_series_json(series),
        }),
        Certificate::Floor { series, floor } => json!({
            "type": "floor",
            "floor": floor,
            "series": stat_series_json(series),
        }),
        Certificate::SupNormDecay { series } => json!({
            "type": "sup_norm_decay",
            "series": stat_series_json(series),
        }),
        Certificate::AlphaWitness { delta, witness } => json!({
            "type": "alpha_witness",
            "delta": delta,
            "witness": witness_report_json(witness),
        }),
        Certificate::AlphaFailure { delta, trimmed } => json!({
            "type": "alpha_failure",
            "delta": delta,
            "trimmed": stat_series_json(trimmed),
        }),
        Certificate::AlmostLpSets { entries } => json!({
            "type": "almost_lp_sets",
            "entries": entries.iter().map(|e| json!({
                "delta": e.delta,
                "exceptional": subset_json(&e.exceptional),
                "exceptional_measure": format_rat(&e.exceptional_measure),
                "series": stat_series_json(&e.series),
            })).collect::<Vec<_>>(),
        }),
        Certificate::AlmostLpExhausted { delta0, budgets, min_tail_sup } => json!({
            "type": "almost_lp_exhausted",
            "delta0": delta0,
            "budgets": budgets,
            "min_tail_sup": min_tail_sup,
        }),
        Certificate::InheritedFrom { mode } => json!({
            "type": "inherited",
            "from": mode.as_str(),
        }),
    }
}

pub fn mode_report_json(r: &ModeReport) -> Json {
    json!({
        "mode": r.mode.as_str(),
        "verdict": r.verdict.as_str(),
        "horizon": r.horizon,
        "tolerance": r.tolerance,
        "certificate": certificate_json(&r.certificate),
    })
}

pub fn diagnose_json(
    family: &str,
    p: f64,
    horizon: u32,
    delta_grid: &[Rat],
    reports: &[ModeReport],
) -> Json {
    json!({
        "schema": SCHEMA,
        "kind": "diagnose",
        "family": family,
        "p": p,
        "horizon": horizon,
        "delta_grid": delta_grid.iter().map(rat_json).collect::<Vec<_>>(),
        "reports": reports.iter().map(mode_report_json).collect::<Vec<_>>(),
    })
}

pub fn gallery_json(p: f64, horizon: u32, rows: &[(String, Vec<ModeReport>)]) -> Json {
    json!({
        "schema": SCHEMA,
        "kind": "gallery",
        "p": p,
        "horizon": horizon,
        "families": rows.iter().map(|(name, reports)| json!({
            "name": name,
            "verdicts": reports.iter()
                .map(|r| (r.mode.as_str().to_string(), Json::from(r.verdict.as_str())))
                .collect::<serde_json::Map<_, _>>(),
        })).collect::<Vec<_>>(),
    })
}

fn estimate_json(e: &LipschitzEstimate) -> Json {
    json!({
        "lo": e.lo,
        "hi": e.hi,
        "grid_quotient_max": e.grid_quotient_max,
        "certified_constant": e.certified_constant,
        "lipschitz": e.lipschitz,
    })
}

pub fn preservation_json(r: &PreservationReport) -> Json {
    json!({
        "schema": SCHEMA,
        "kind": "preserve",
        "map": r.map_name,
        "estimate": estimate_json(&r.estimate),
        "preserved": r.preserved,
        "before": r.before.iter().map(mode_report_json).collect::<Vec<_>>(),
        "after": r.after.iter().map(mode_report_json).collect::<Vec<_>>(),
    })
}

fn sample_json(s: &RelaxSample) -> Json {
    json!({
        "time": s.time,
        "eps": s.eps,
        "psi": s.psi,
        "entropy_total": s.entropy_total,
        "trimmed_l2": s.trimmed_l2,
        "complement_measure": s.complement_measure,
        "mass": s.mass,
    })
}

pub fn relaxation_json(run: &RelaxationRun) -> Json {
    json!({
        "schema": SCHEMA,
        "kind": "relax",
        "constants": {
            "c1": run.constants.c1,
            "c2": run.constants.c2,
            "r": run.constants.r,
            "delta_low": run.constants.delta_low,
            "m": run.constants.m,
            "r_max": run.constants.r_max,
        },
        "finals": run.finals.iter().map(sample_json).collect::<Vec<_>>(),
        "samples": run.samples.iter().map(sample_json).collect::<Vec<_>>(),
    })
}

/// Statistic CSV: `n,stat_name,p,delta,value`, one row per entry.
pub fn write_stats_csv<W: Write>(w: W, series: &[StatSeries]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "stat_name", "p", "delta", "value"])
        .map_err(csv_err)?;
    for s in series {
        for (n, q) in &s.entries {
            out.write_record([
                n.to_string(),
                s.stat_name.clone(),
                s.p.to_string(),
                s.delta.map(|d| d.to_string()).unwrap_or_default(),
                q.to_f64().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Relaxation CSV:
/// `time,eps,psi,entropy_total,trimmed_l2,complement_measure,mass`.
pub fn write_relax_csv<W: Write>(w: W, run: &RelaxationRun) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "time",
        "eps",
        "psi",
        "entropy_total",
        "trimmed_l2",
        "complement_measure",
        "mass",
    ])
    .map_err(csv_err)?;
    for s in &run.samples {
        out.write_record([
            s.time.to_string(),
            s.eps.to_string(),
            s.psi.to_string(),
            s.entropy_total.to_string(),
            s.trimmed_l2.to_string(),
            s.complement_measure.to_string(),
            s.mass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::BadConfig(format!("csv write failed: {e}"))
}

/// A family description read from JSON: either a gallery name or an
/// explicit per-index table with rational breakpoints and values.
#[derive(Debug, Deserialize)]
pub struct FamilySpec {
    pub p: f64,
    #[serde(default)]
    pub horizon: Option<u32>,
    pub family: FamilyKind,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gallery { name: String },
    Custom(CustomFamily),
}

#[derive(Debug, Deserialize)]
pub struct CustomFamily {
    #[serde(default)]
    pub name: Option<String>,
    pub domain: DomainSpec,
    pub terms: BTreeMap<u32, FunctionSpec>,
    #[serde(default)]
    pub limit: Option<FunctionSpec>,
    #[serde(default)]
    pub witnesses: Option<BTreeMap<u32, Vec<(String, String)>>>,
}

#[derive(Debug, Deserialize)]
pub struct DomainSpec {
    pub left: String,
    pub right: String,
}

/// Breakpoints span the domain; values are rational literals, one per
/// cell.
#[derive(Debug, Deserialize)]
pub struct FunctionSpec {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

fn parse_domain(spec: &DomainSpec) -> Result<Domain> {
    Domain::closed(parse_rat(&spec.left)?, parse_rat(&spec.right)?)
}

fn parse_function(spec: &FunctionSpec, domain: &Domain) -> Result<SimpleFunction> {
    let bps = spec
        .breakpoints
        .iter()
        .map(|s| parse_rat(s))
        .collect::<Result<Vec<_>>>()?;
    let values = spec
        .values
        .iter()
        .map(|s| Ok(Value::from_rat(parse_rat(s)?)))
        .collect::<Result<Vec<_>>>()?;
    SimpleFunction::new(Partition::new(domain.clone(), bps)?, values)
}

pub fn family_from_spec(spec: &FamilySpec) -> Result<SequenceFamily> {
    let p = Exponent::new(spec.p)?;
    match &spec.family {
        FamilyKind::Gallery { name } => crate::sequences::gallery(name, p),
        FamilyKind::Custom(custom) => {
            let domain = parse_domain(&custom.domain)?;
            let mut terms = BTreeMap::new();
            for (&n, f) in &custom.terms {
                terms.insert(n, parse_function(f, &domain)?);
            }
            let limit = custom
                .limit
                .as_ref()
                .map(|f| parse_function(f, &domain))
                .transpose()?;
            let witnesses = custom
                .witnesses
                .as_ref()
                .map(|ws| {
                    ws.iter()
                        .map(|(&n, ivs)| {
                            let parsed = ivs
                                .iter()
                                .map(|(lo, hi)| Ok((parse_rat(lo)?, parse_rat(hi)?)))
                                .collect::<Result<Vec<_>>>()?;
                            Ok((n, MeasurableSubset::from_intervals(domain.clone(), parsed)?))
                        })
                        .collect::<Result<BTreeMap<_, _>>>()
                })
                .transpose()?;
            let name = custom.name.clone().unwrap_or_else(|| "custom".into());
            Ok(SequenceFamily::from_table(name, p, terms, limit, witnesses))
        }
    }
}

/// Parses a family spec document and returns the family with the
/// horizon it requests, if any.
pub fn load_family(json: &str) -> Result<(SequenceFamily, Option<u32>)> {
    let spec: FamilySpec = serde_json::from_str(json)?;
    let fam = family_from_spec(&spec)?;
    Ok((fam, spec.horizon))
}
