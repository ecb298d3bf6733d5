//! Seeded random families shared by the acceptance suite.

use std::sync::Arc;

use modeconv::measure::{Domain, MeasurableSubset, Partition, SimpleFunction};
use modeconv::rational::{rat, rat_int, rat_pow, Rat};
use modeconv::sequences::SequenceFamily;
use modeconv::value::{Exponent, Value};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn p2() -> Exponent {
    Exponent::new(2.0).unwrap()
}

fn random_values(rng: &mut ChaCha8Rng, cells: usize, force_nonzero: bool) -> Vec<Value> {
    let mut values: Vec<Value> = (0..cells)
        .map(|_| Value::from_rat(rat(rng.gen_range(-16..=16), 8)))
        .collect();
    if force_nonzero {
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        values[0] = Value::from_rat(rat(sign * rng.gen_range(1..=16), 8));
    }
    values
}

/// A seeded simple-function family on the unit interval with at most 32
/// cells. Four behaviors cycle pseudo-randomly: convergent in Lp,
/// shrinking spikes (alpha-p but not Lp), a fixed perturbation
/// (divergent in measure), and a fixed small perturbation (convergent
/// in measure but in no stronger mode).
pub fn random_family(seed: u64) -> SequenceFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = rng.gen_range(3..=5u32);
    let domain = Domain::unit();
    let partition = Partition::dyadic(domain.clone(), level);
    let cells = partition.cell_count();
    let g = SimpleFunction::new(partition.clone(), random_values(&mut rng, cells, false)).unwrap();
    let h = SimpleFunction::new(partition.clone(), random_values(&mut rng, cells, true)).unwrap();
    let kind = rng.gen_range(0..4u8);
    let one = Rat::one();
    let limit = g.clone();
    let name = format!("random-{seed}-kind{kind}");
    let gen: Arc<dyn Fn(u32) -> modeconv::error::Result<SimpleFunction> + Send + Sync> = match kind
    {
        0 => {
            let (g, h) = (g.clone(), h.clone());
            let one = one.clone();
            Arc::new(move |n| g.linear(&one, &h, &rat_pow(&rat(1, 2), n)))
        }
        1 => {
            let (g, d) = (g.clone(), domain.clone());
            let c = rat(rng.gen_range(1..=4), 2);
            let one = one.clone();
            Arc::new(move |n| {
                let spike = Value::root(c.clone(), rat_int(n as i64))?;
                let bump = SimpleFunction::indicator(d.clone(), Rat::zero(), rat(1, n as i64), spike)?;
                g.linear(&one, &bump, &one)
            })
        }
        2 => {
            let (g, h) = (g.clone(), h.clone());
            let one = one.clone();
            Arc::new(move |_| g.linear(&one, &h, &one))
        }
        _ => {
            let (g, h) = (g.clone(), h.clone());
            let one = one.clone();
            Arc::new(move |_| g.linear(&one, &h, &rat(1, 64)))
        }
    };
    SequenceFamily::new(
        name,
        p2(),
        gen,
        Some(Arc::new(move |_| Ok(limit.clone()))),
        None,
    )
}

/// A pair of random simple functions on a shared irregular partition
/// with at most `max_cells` cells (breakpoints on the 1/64 lattice).
pub fn random_pair(seed: u64, max_cells: usize) -> (SimpleFunction, SimpleFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let domain = Domain::unit();
    let cuts = rng.gen_range(0..max_cells);
    let mut marks: Vec<i64> = Vec::new();
    while marks.len() < cuts {
        let m = rng.gen_range(1..64i64);
        if !marks.contains(&m) {
            marks.push(m);
        }
    }
    marks.sort_unstable();
    let mut breakpoints = vec![Rat::zero()];
    breakpoints.extend(marks.iter().map(|&m| rat(m, 64)));
    breakpoints.push(Rat::one());
    let partition = Partition::new(domain, breakpoints).unwrap();
    let cells = partition.cell_count();
    let f = SimpleFunction::new(partition.clone(), random_values(&mut rng, cells, false)).unwrap();
    let g = SimpleFunction::new(partition, random_values(&mut rng, cells, true)).unwrap();
    (f, g)
}

/// An alpha-p-Cauchy family with the known limit `g`: even seeds
/// converge in Lp (`f_n = g + 2^-n h`), odd seeds carry a spike of
/// height `n` on `[0, 2^-n)` that every canonical witness excludes.
pub fn cauchy_family(seed: u64) -> (SequenceFamily, SimpleFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xca0c);
    let domain = Domain::unit();
    let partition = Partition::dyadic(domain.clone(), 4);
    let cells = partition.cell_count();
    let g = SimpleFunction::new(partition.clone(), random_values(&mut rng, cells, false)).unwrap();
    let limit = g.clone();
    let one = Rat::one();
    let fam = if seed % 2 == 0 {
        let h = SimpleFunction::new(partition, random_values(&mut rng, cells, true)).unwrap();
        let gen_g = g.clone();
        let d = domain.clone();
        SequenceFamily::new(
            format!("cauchy-lp-{seed}"),
            p2(),
            Arc::new(move |n| gen_g.linear(&one, &h, &rat_pow(&rat(1, 2), n))),
            Some(Arc::new(move |_| Ok(limit.clone()))),
            Some(Arc::new(move |_| Ok(MeasurableSubset::full(d.clone())))),
        )
    } else {
        let gen_g = g.clone();
        let d = domain.clone();
        let wd = domain.clone();
        SequenceFamily::new(
            format!("cauchy-spike-{seed}"),
            p2(),
            Arc::new(move |n| {
                let lo = rat_pow(&rat(1, 2), n);
                let bump =
                    SimpleFunction::indicator(d.clone(), Rat::zero(), lo, Value::from_int(n as i64))?;
                gen_g.linear(&Rat::one(), &bump, &Rat::one())
            }),
            Some(Arc::new(move |_| Ok(limit.clone()))),
            Some(Arc::new(move |n| {
                MeasurableSubset::interval(wd.clone(), rat_pow(&rat(1, 2), n), Rat::one())
            })),
        )
    };
    (fam, g)
}
