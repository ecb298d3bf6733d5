//! Which scalar maps preserve the convergence modes? Lipschitz maps do;
//! the square map on an unbounded value range does not. This example
//! estimates Lipschitz constants over the value range of a family,
//! builds the block counterexample for the square map, and shows its
//! convergence collapsing under composition.
//!
//!     cargo run --example preservation_counterexample

use modeconv::modes::{default_delta_grid, lp_stat, verdict, DecayCriterion};
use modeconv::preservation::{build_counterexample, verify_preservation, ScalarMap};
use modeconv::sequences::gallery;
use modeconv::value::Exponent;

fn main() -> modeconv::Result<()> {
    let p = Exponent::new(1.0)?;
    let criterion = DecayCriterion::default();
    let grid = default_delta_grid();
    let horizon = 32;

    // a Lipschitz map on a bounded family: everything survives
    let spike = gallery("spike", Exponent::new(2.0)?)?;
    let abs = verify_preservation(&ScalarMap::Abs, &spike, horizon, &criterion, &grid)?;
    println!(
        "abs on spike: certified Lipschitz constant {:?}, preserved = {}",
        abs.estimate.certified_constant, abs.preserved
    );

    // the square map stretches far-apart values without bound; the
    // breaking pairs assemble into a family with lp_stat = 1/n exactly
    let fam = build_counterexample(&ScalarMap::Square, p, horizon)?;
    let before = lp_stat(&fam, horizon)?;
    println!("\ncounterexample before composition (first entries of lp_stat):");
    for (n, q) in before.entries.iter().take(5) {
        println!("  n = {n}: {}", q.to_f64());
    }

    let report = verify_preservation(&ScalarMap::Square, &fam, horizon, &criterion, &grid)?;
    println!(
        "\nsquare map value range [{:.2}, {:.2}], sampled quotient max {:.2}",
        report.estimate.lo, report.estimate.hi, report.estimate.grid_quotient_max
    );
    println!("preserved = {}", report.preserved);
    println!("\nmode table before / after composition:");
    let after = verdict(
        &ScalarMap::Square.compose_family(&fam),
        horizon,
        &criterion,
        &grid,
    )?;
    for (b, a) in report.before.iter().zip(&after) {
        println!(
            "  {:<10} {:<28} -> {}",
            b.mode.as_str(),
            b.verdict.as_str(),
            a.verdict.as_str()
        );
    }
    Ok(())
}
