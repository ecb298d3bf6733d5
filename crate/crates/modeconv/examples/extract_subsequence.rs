//! Extracts the fast subsequence of the typewriter family: indices
//! whose witness complements shrink like 2^-n, together with the tail
//! intersections that certify convergence almost in Lp along the
//! subsequence even though the full sequence fails that mode.
//!
//!     cargo run --example extract_subsequence

use modeconv::modes::extract_almost_lp_subsequence;
use modeconv::rational::{rat, rat_to_f64};
use modeconv::sequences::gallery;
use modeconv::value::Exponent;

fn main() -> modeconv::Result<()> {
    let p = Exponent::new(2.0)?;
    let fam = gallery("typewriter", p)?;
    let extraction = extract_almost_lp_subsequence(&fam, 512, &rat(1, 64))?;

    println!("typewriter subsequence with mu(B_k^c) < 2^-n:\n");
    println!("{:>3} {:>6} {:>22} {:>10}", "n", "k_n", "mu(C_n^c)", "trimmed");
    for (i, k) in extraction.indices.iter().enumerate() {
        println!(
            "{:>3} {:>6} {:>22} {:>10}",
            i + 1,
            k,
            rat_to_f64(&extraction.tail_complement_measures[i]),
            extraction.trimmed[i].to_f64()
        );
    }
    if let Some(n) = extraction.exhausted_at {
        println!("\nhorizon exhausted while hunting k_{n}; deeper indices need a larger horizon");
    }
    if let Some(exceptional) = &extraction.exceptional {
        println!(
            "exceptional set for delta = 1/64 has measure {}",
            rat_to_f64(&exceptional.measure())
        );
    }
    Ok(())
}
