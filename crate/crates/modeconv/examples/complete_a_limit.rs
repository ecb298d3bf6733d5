//! Completeness in action: hand the pipeline an alpha-p-Cauchy family
//! with no declared limit and let it recover one. The candidate is the
//! stabilized tail term of the fast subsequence; the family is then
//! certified against it.
//!
//!     cargo run --example complete_a_limit

use std::sync::Arc;

use modeconv::measure::{Domain, MeasurableSubset, Partition, SimpleFunction};
use modeconv::modes::{complete_limit, default_delta_grid, DecayCriterion, Mode};
use modeconv::rational::{rat, rat_pow, Rat};
use modeconv::value::{Exponent, Value};
use modeconv::sequences::SequenceFamily;
use num_traits::One;

fn main() -> modeconv::Result<()> {
    let p = Exponent::new(2.0)?;
    let domain = Domain::unit();
    let partition = Partition::dyadic(domain.clone(), 3);
    let cells = partition.cell_count();

    // the hidden limit: a staircase the family should rediscover
    let stairs = SimpleFunction::new(
        partition.clone(),
        (0..cells).map(|i| Value::from_int(i as i64 % 3)).collect(),
    )?;
    let ripple = SimpleFunction::new(
        partition,
        (0..cells)
            .map(|i| Value::from_rat(rat(if i % 2 == 0 { 1 } else { -1 }, 1)))
            .collect(),
    )?;

    let gen_stairs = stairs.clone();
    let fam = SequenceFamily::new(
        "staircase+ripple",
        p,
        Arc::new(move |n| gen_stairs.linear(&Rat::one(), &ripple, &rat_pow(&rat(1, 2), n))),
        None,
        Some(Arc::new({
            let d = domain.clone();
            move |_| Ok(MeasurableSubset::full(d.clone()))
        })),
    );

    let report = complete_limit(&fam, 64, &DecayCriterion::default(), &default_delta_grid())?;
    println!("extracted subsequence: {:?}", report.extracted);
    println!("stabilized: {}", report.stabilized);
    println!("max tail oscillation: {:.3e}", report.max_oscillation);

    let mid = rat(5, 16);
    if let (Some(recovered), Some(hidden)) =
        (report.candidate.value_at(&mid), stairs.value_at(&mid))
    {
        println!(
            "candidate at x = 5/16: {:.6} (hidden limit: {:.6})",
            recovered.to_f64(p),
            hidden.to_f64(p)
        );
    }

    for r in &report.reports {
        if r.mode == Mode::AlphaP {
            println!("alpha-p against the candidate: {}", r.verdict.as_str());
        }
    }
    Ok(())
}
