//! The acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `--nocapture` to see the lines as they
//! complete.

mod common;

use std::panic::AssertUnwindSafe;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use modeconv::measure::{integrate_p, MeasurableSubset};
use modeconv::modes::{
    alpha_witness, complete_limit, default_delta_grid, deviation_stat,
    extract_almost_lp_subsequence, lp_stat, report_for, trimmed_stat, verdict, worst_small_set,
    DecayCriterion, Mode, ModeReport, Verdict,
};
use modeconv::preservation::{counterexample_family, BreakingPair, ScalarMap};
use modeconv::rational::{rat, rat_int, rat_pow, rat_to_f64, Rat};
use modeconv::relaxation::{lemma_constants, relaxation_experiment, EnergyLaw, RelaxConfig};
use modeconv::sequences::{gallery, typewriter_index, SequenceFamily};
use modeconv::value::Exponent;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{cauchy_family, p2, random_family, random_pair};

fn gate(number: u32, description: &str, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(body));
    let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!(
        "[acceptance] {number:02} {status} {description} ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
    if let Err(payload) = outcome {
        std::panic::resume_unwind(payload);
    }
}

fn criterion() -> DecayCriterion {
    DecayCriterion::default()
}

fn parallel<T: Sync>(items: &[T], worker: impl Fn(&T) + Sync) {
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .clamp(1, 8)
        .min(items.len().max(1));
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                worker(&items[i]);
            });
        }
    });
}

fn holds(reports: &[ModeReport], mode: Mode) -> bool {
    report_for(reports, mode).verdict == Verdict::CertifiedHolds
}

#[test]
fn criterion_01_gallery_exactness() {
    gate(1, "gallery exactness at p = 2, horizon 256", || {
        let start = Instant::now();
        let horizon = 256u32;
        let grid = default_delta_grid();

        let spike = gallery("spike", p2()).unwrap();
        for (_, q) in &lp_stat(&spike, horizon).unwrap().entries {
            assert_eq!(q.as_exact(), Some(&Rat::one()));
        }
        for delta in &grid {
            let witness = alpha_witness(&spike, delta, horizon).unwrap();
            for entry in &witness.entries {
                assert!(entry.trimmed.is_zero(), "spike trimmed not exactly zero");
            }
        }

        let spread = gallery("spread", p2()).unwrap();
        for (_, q) in &lp_stat(&spread, horizon).unwrap().entries {
            assert_eq!(q.as_exact(), Some(&Rat::one()));
        }
        for delta in &grid {
            let trimmed = trimmed_stat(&spread, delta, horizon).unwrap();
            for (n, q) in &trimmed.entries {
                // n^{-1/2} < delta  <=>  1 < n delta^2
                if rat_int(*n as i64) * delta * delta > Rat::one() {
                    assert_eq!(q.as_exact(), Some(&Rat::one()), "spread trimmed at n={n}");
                }
            }
        }

        let typewriter = gallery("typewriter", p2()).unwrap();
        for n in 1..=horizon {
            let witness = typewriter.witness_at(n).unwrap();
            let trimmed = integrate_p(
                &typewriter.term(n).unwrap(),
                &typewriter.limit_at(n).unwrap(),
                p2(),
                &witness,
            )
            .unwrap();
            assert!(trimmed.is_zero(), "typewriter trimmed at n={n}");
            let k = typewriter_index(n).unwrap().k;
            assert_eq!(
                witness.complement().measure(),
                rat_pow(&rat(1, 2), k),
                "typewriter complement at n={n}"
            );
        }

        assert!(start.elapsed().as_secs_f64() < 10.0, "exceeded 10 s budget");
    });
}

const EXPECTED_VERDICTS: [(&str, [Verdict; 4]); 4] = {
    use Verdict::{CertifiedFailsAtHorizon as F, CertifiedHolds as H};
    [
        ("spike", [F, H, H, H]),
        ("spread", [F, F, F, H]),
        ("typewriter", [F, F, H, H]),
        ("constant", [H, H, H, H]),
    ]
};

#[test]
fn criterion_02_verdict_fixture_table() {
    gate(2, "gallery verdict fixture table and exit code", || {
        let grid = default_delta_grid();
        for (name, expected) in EXPECTED_VERDICTS {
            let fam = gallery(name, p2()).unwrap();
            let reports = verdict(&fam, 256, &criterion(), &grid).unwrap();
            let modes = [Mode::Lp, Mode::AlmostLp, Mode::AlphaP, Mode::Measure];
            for (mode, want) in modes.into_iter().zip(expected) {
                assert_eq!(
                    report_for(&reports, mode).verdict,
                    want,
                    "{name}/{}",
                    mode.as_str()
                );
            }
        }
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_modeconv"))
            .arg("gallery")
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "gallery subcommand exit code");
    });
}

fn lattice_sound(reports: &[ModeReport]) -> bool {
    let order = [Mode::Lp, Mode::AlmostLp, Mode::AlphaP, Mode::Measure];
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            let stronger = report_for(reports, order[i]).verdict;
            let weaker = report_for(reports, order[j]).verdict;
            if stronger == Verdict::CertifiedHolds && weaker != Verdict::CertifiedHolds {
                return false;
            }
            if weaker == Verdict::CertifiedFailsAtHorizon
                && stronger != Verdict::CertifiedFailsAtHorizon
            {
                return false;
            }
        }
    }
    true
}

#[test]
fn criterion_03_implication_lattice() {
    gate(3, "implication lattice on 200 random families", || {
        let start = Instant::now();
        let grid = default_delta_grid();
        let seeds: Vec<u64> = (0..200).collect();
        parallel(&seeds, |&seed| {
            let fam = random_family(seed);
            let reports = verdict(&fam, 64, &criterion(), &grid).unwrap();
            assert!(lattice_sound(&reports), "lattice violation for seed {seed}");
        });
        assert!(start.elapsed().as_secs_f64() < 60.0, "exceeded 60 s budget");
    });
}

#[test]
fn criterion_04_characterization_equivalence() {
    gate(4, "alpha-p equals measure + trimmed decay", || {
        let grid = default_delta_grid();
        let crit = criterion();
        let relaxed = DecayCriterion::new(crit.tolerance * 10.0, crit.window_fraction).unwrap();
        let check = |fam: &SequenceFamily, horizon: u32| {
            let reports = verdict(fam, horizon, &crit, &grid).unwrap();
            let measure_holds = holds(&reports, Mode::Measure);
            let alpha_holds = holds(&reports, Mode::AlphaP);
            // a delta only counts once its deviation series has decayed:
            // the theorem's trimmed integrals live on the witness sets
            // that measure convergence supplies at that delta
            let active: Vec<bool> = grid
                .iter()
                .map(|d| crit.decays(&deviation_stat(fam, d, horizon).unwrap()))
                .collect();
            let decaying: Vec<bool> = grid
                .iter()
                .zip(&active)
                .map(|(d, &a)| a && crit.decays(&trimmed_stat(fam, d, horizon).unwrap()))
                .collect();
            let formula = measure_holds && decaying.iter().any(|&b| b);
            assert_eq!(
                alpha_holds,
                formula,
                "characterization mismatch for {}",
                fam.name()
            );
            // delta-independence under a measure certificate: one good
            // delta forces every activated delta at the relaxed tolerance
            if formula {
                for (d, &a) in grid.iter().zip(&active) {
                    assert!(
                        !a || relaxed.decays(&trimmed_stat(fam, d, horizon).unwrap()),
                        "delta-independence failed for {} at delta {}",
                        fam.name(),
                        rat_to_f64(d)
                    );
                }
            }
        };
        let jobs: Vec<(Option<&str>, u64)> = vec![
            (Some("spike"), 0),
            (Some("spread"), 0),
            (Some("typewriter"), 0),
            (Some("constant"), 0),
        ]
        .into_iter()
        .chain((1000..1050).map(|s| (None, s)))
        .collect();
        parallel(&jobs, |job| match job {
            (Some(name), _) => check(&gallery(name, p2()).unwrap(), 256),
            (None, seed) => check(&random_family(*seed), 64),
        });
    });
}

#[test]
fn criterion_05_worst_small_set_oracle() {
    gate(5, "greedy trimming matches brute force on 100 functions", || {
        for seed in 0..100u64 {
            let (f, g) = random_pair(seed, 12);
            let lens: Vec<f64> = f
                .partition()
                .cells()
                .map(|(lo, hi)| rat_to_f64(&(hi - lo)))
                .collect();
            let dens: Vec<f64> = f
                .values()
                .iter()
                .zip(g.values())
                .map(|(u, v)| u.sub(v).abs_pow(p2()).to_f64())
                .collect();
            let cells = lens.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0d6e7);
            for _ in 0..5 {
                let budget = rat(rng.gen_range(0..=16), 16);
                let b = rat_to_f64(&budget);
                // optimum over all whole-cell subsets plus one split cell
                let mut best = 0.0f64;
                for mask in 0u32..(1 << cells) {
                    let mut len = 0.0;
                    let mut val = 0.0;
                    for i in 0..cells {
                        if mask & (1 << i) != 0 {
                            len += lens[i];
                            val += lens[i] * dens[i];
                        }
                    }
                    if len > b + 1e-12 {
                        continue;
                    }
                    let spare = b - len;
                    let extra = (0..cells)
                        .filter(|i| mask & (1 << i) == 0)
                        .map(|i| spare.min(lens[i]) * dens[i])
                        .fold(0.0f64, f64::max);
                    best = best.max(val + extra);
                }
                let (_, greedy) = worst_small_set(&f, &g, p2(), &budget).unwrap();
                assert!(
                    (greedy.to_f64() - best).abs() <= 1e-12,
                    "seed {seed}: greedy {} vs brute {best}",
                    greedy.to_f64()
                );
            }
        }
    });
}

#[test]
fn criterion_06_typewriter_subsequence() {
    gate(6, "typewriter subsequence extraction to n = 8", || {
        let fam = gallery("typewriter", p2()).unwrap();
        let extraction = extract_almost_lp_subsequence(&fam, 512, &rat(1, 64)).unwrap();
        assert!(extraction.indices.len() >= 8, "need eight extracted indices");
        for n in 1..=8usize {
            assert_eq!(extraction.indices[n - 1], 1 << n.checked_add(1).unwrap());
            assert!(
                extraction.tail_complement_measures[n - 1] <= rat_pow(&rat(1, 2), n as u32 - 1),
                "tail complement too large at n={n}"
            );
            assert!(
                extraction.trimmed[n - 1].is_zero(),
                "trimmed not exactly zero at n={n}"
            );
        }
    });
}

#[test]
fn criterion_07_completeness_pipeline() {
    gate(7, "complete_limit recovers 20 known limits", || {
        let seeds: Vec<u64> = (0..20).collect();
        let grid = default_delta_grid();
        parallel(&seeds, |&seed| {
            let (fam, truth) = cauchy_family(seed);
            let report = complete_limit(&fam, 64, &criterion(), &grid).unwrap();
            let full = MeasurableSubset::full(truth.domain().clone());
            let err = integrate_p(&report.candidate, &truth, p2(), &full).unwrap();
            assert!(
                err.to_f64() <= 1e-9,
                "seed {seed}: candidate misses the limit by {}",
                err.to_f64()
            );
            assert!(
                holds(&report.reports, Mode::AlphaP),
                "seed {seed}: alpha-p does not hold against the candidate"
            );
        });
    });
}

#[test]
fn criterion_08_preservation() {
    gate(8, "affine scaling law and the square-map counterexample", || {
        // (a) slope-2 affine map on the spike: p-th-power statistics
        // scale by 2^p = 4 exactly and no verdict moves
        let grid = default_delta_grid();
        let spike = gallery("spike", p2()).unwrap();
        let map = ScalarMap::Affine {
            a: rat_int(2),
            b: rat_int(3),
        };
        let composed = map.compose_family(&spike);
        let horizon = 64u32;
        let before_lp = lp_stat(&spike, horizon).unwrap();
        let after_lp = lp_stat(&composed, horizon).unwrap();
        let four = rat_int(4);
        for ((_, b), (_, a)) in before_lp.entries.iter().zip(&after_lp.entries) {
            assert_eq!(
                a.as_exact().unwrap(),
                &(b.as_exact().unwrap() * &four),
                "lp stat must scale by 2^p exactly"
            );
        }
        for delta in &grid {
            let double = delta * rat_int(2);
            let before = trimmed_stat(&spike, delta, horizon).unwrap();
            let after = trimmed_stat(&composed, &double, horizon).unwrap();
            for ((_, b), (_, a)) in before.entries.iter().zip(&after.entries) {
                assert_eq!(a.as_exact().unwrap(), &(b.as_exact().unwrap() * &four));
            }
            let before_dev = deviation_stat(&spike, delta, horizon).unwrap();
            let after_dev = deviation_stat(&composed, &double, horizon).unwrap();
            for ((_, b), (_, a)) in before_dev.entries.iter().zip(&after_dev.entries) {
                assert_eq!(a.as_exact(), b.as_exact());
            }
        }
        let before_reports = verdict(&spike, horizon, &criterion(), &grid).unwrap();
        let after_reports = verdict(&composed, horizon, &criterion(), &grid).unwrap();
        for (b, a) in before_reports.iter().zip(&after_reports) {
            assert_eq!(b.mode, a.mode);
            assert_eq!(b.verdict, a.verdict, "verdict moved for {}", b.mode.as_str());
        }

        // (b) square map at p = 1 with the prescribed pairs
        // b_n = n, a_n = n + 1/(2n)
        let p1 = Exponent::new(1.0).unwrap();
        let pairs: Vec<BreakingPair> = (1..=horizon)
            .map(|n| BreakingPair {
                n,
                a: rat_int(n as i64) + rat(1, 2 * n as i64),
                b: rat_int(n as i64),
            })
            .collect();
        let fam = counterexample_family("square-breaker", &pairs, p1).unwrap();
        for (n, q) in &lp_stat(&fam, horizon).unwrap().entries {
            assert_eq!(
                q.as_exact(),
                Some(&rat(1, *n as i64)),
                "lp stat must be exactly 1/n"
            );
        }
        let squared = ScalarMap::Square.compose_family(&fam);
        let half = rat(1, 2);
        for n in [1u32, 4, 16, 64] {
            let term = squared.term(n).unwrap();
            let limit = squared.limit_at(n).unwrap();
            let full = MeasurableSubset::full(term.domain().clone());
            let total = integrate_p(&term, &limit, p1, &full).unwrap();
            let (_, removable) = worst_small_set(&term, &limit, p1, &half).unwrap();
            // any witness with complement measure below 1/2 keeps at
            // least total - removable of the mass
            let kept = total.to_f64() - removable.to_f64();
            assert!(
                kept > 0.5,
                "n={n}: only {kept} survives the worst half-measure witness"
            );
        }
    });
}

#[test]
fn criterion_09_lemma_constants() {
    gate(9, "comparison constants for the quadratic law", || {
        let law = EnergyLaw::new(2.0, 1.0).unwrap();
        let constants = lemma_constants(&law, 0.5, 2.0, 8.0).unwrap();
        assert_eq!(constants.r, 3.0);
        assert!((constants.c1 - (1.0 - 1e-6)).abs() <= 1e-9);
        assert!((constants.c2 - (1.0 - 1e-6)).abs() <= 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(0x1e44a);
        for _ in 0..10_000 {
            let rho = rng.gen_range(0.0..=constants.r);
            let bar = rng.gen_range(0.5..=2.0);
            let d = rho - bar;
            let slack = law.rel_entropy(rho, bar) - constants.c1 * d * d;
            assert!(slack >= -1e-12, "quadratic regime slack {slack}");
        }
        for _ in 0..10_000 {
            let rho = rng.gen_range(constants.r..=8.0);
            let bar = rng.gen_range(0.5..=2.0);
            let d: f64 = rho - bar;
            let slack = law.rel_entropy(rho, bar) - constants.c2 * d.abs().powf(law.gamma);
            assert!(slack >= -1e-12, "tail regime slack {slack}");
        }
    });
}

#[test]
fn criterion_10_relaxation_trend() {
    gate(10, "relaxation diagnostics tighten as epsilon shrinks", || {
        let start = Instant::now();
        let config = RelaxConfig::default();
        assert_eq!(config.cells, 128);
        assert_eq!(config.epsilons, vec![0.25, 0.0625, 0.015625]);
        let run = relaxation_experiment(&config).unwrap();
        let sups: Vec<f64> = config
            .epsilons
            .iter()
            .map(|&eps| {
                run.samples
                    .iter()
                    .filter(|s| s.eps == eps)
                    .map(|s| s.psi)
                    .fold(0.0f64, f64::max)
            })
            .collect();
        for w in sups.windows(2) {
            assert!(w[1] < w[0], "sup psi not strictly decreasing: {sups:?}");
        }
        let trimmed: Vec<f64> = run.finals.iter().map(|s| s.trimmed_l2).collect();
        for w in trimmed.windows(2) {
            assert!(w[1] < w[0], "final trimmed_l2 not decreasing: {trimmed:?}");
        }
        for &eps in &config.epsilons {
            let masses: Vec<f64> = run
                .samples
                .iter()
                .filter(|s| s.eps == eps)
                .map(|s| s.mass)
                .collect();
            let m0 = masses[0];
            for m in &masses {
                assert!((m - m0).abs() / m0.abs() <= 1e-12, "mass drift at eps {eps}");
            }
        }
        assert!(start.elapsed().as_secs_f64() < 300.0, "exceeded 5 min budget");
    });
}
