//! Runs the verdict engine over the four built-in families and prints
//! the mode table. The spike loses Lp but keeps every weaker mode, the
//! spreading family survives only in measure, the typewriter keeps
//! alpha-p while losing almost-in-Lp, and the constant family keeps
//! everything.
//!
//!     cargo run --example gallery_tour

use modeconv::modes::{default_delta_grid, verdict, DecayCriterion, Mode};
use modeconv::sequences::{gallery, GALLERY_NAMES};
use modeconv::value::Exponent;

fn main() -> modeconv::Result<()> {
    let p = Exponent::new(2.0)?;
    let horizon = 256;
    let criterion = DecayCriterion::default();
    let grid = default_delta_grid();

    println!("{:<12} {:<28} {:<28} {:<28} {:<28}", "family", "Lp", "almost_Lp", "alpha_p", "measure");
    for name in GALLERY_NAMES {
        let fam = gallery(name, p)?;
        let reports = verdict(&fam, horizon, &criterion, &grid)?;
        let cell = |mode: Mode| {
            reports
                .iter()
                .find(|r| r.mode == mode)
                .map(|r| r.verdict.as_str())
                .unwrap_or("-")
        };
        println!(
            "{:<12} {:<28} {:<28} {:<28} {:<28}",
            name,
            cell(Mode::Lp),
            cell(Mode::AlmostLp),
            cell(Mode::AlphaP),
            cell(Mode::Measure)
        );
    }
    Ok(())
}
