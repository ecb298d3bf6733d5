//! Diffusive relaxation of isentropic Euler with friction on the
//! periodic unit interval, against its porous-medium diffusion limit.
//!
//! The scaled system is
//!
//! ```text
//! rho_t + m_x = 0
//! m_t + (m^2/rho + p(rho)/eps)_x = -m/eps,     p(rho) = k rho^gamma
//! ```
//!
//! whose formal limit as eps -> 0 is `rho_t = p(rho)_xx`. The hyperbolic
//! part is advanced with a Rusanov flux, the friction exactly by the
//! factor `exp(-dt/eps)`. The distance to the limit is measured by the
//! relative entropy, split across the density cutoff `rho <= R` — the
//! same witness-set bookkeeping the convergence modes formalize, with
//! `n = 1/eps` as the sequence index.

use crate::error::{Error, Result};

/// Entropy and pressure bundle for `p(rho) = k rho^gamma`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyLaw {
    pub gamma: f64,
    pub k: f64,
}

impl EnergyLaw {
    pub fn new(gamma: f64, k: f64) -> Result<Self> {
        if !(gamma > 1.0) || !(k > 0.0) {
            return Err(Error::BadConfig("need gamma > 1 and k > 0".into()));
        }
        Ok(EnergyLaw { gamma, k })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.k * rho.powf(self.gamma)
    }

    pub fn pressure_deriv(&self, rho: f64) -> f64 {
        self.k * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// `h(rho) = k rho^gamma / (gamma - 1)`.
    pub fn entropy(&self, rho: f64) -> f64 {
        self.k * rho.powf(self.gamma) / (self.gamma - 1.0)
    }

    pub fn entropy_deriv(&self, rho: f64) -> f64 {
        self.k * self.gamma * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }

    /// `h(rho | bar) = h(rho) - h(bar) - h'(bar)(rho - bar) >= 0`.
    pub fn rel_entropy(&self, rho: f64, bar: f64) -> f64 {
        self.entropy(rho) - self.entropy(bar) - self.entropy_deriv(bar) * (rho - bar)
    }
}

/// Lower-bound constants for the relative entropy in the two density
/// regimes: `h(rho | bar) >= c1 (rho - bar)^2` for `rho in [0, r]` and
/// `h(rho | bar) >= c2 |rho - bar|^gamma` for `rho in (r, r_max]`,
/// whenever the reference sits in `[delta_low, m]`.
#[derive(Clone, Copy, Debug)]
pub struct LemmaConstants {
    pub c1: f64,
    pub c2: f64,
    pub r: f64,
    pub delta_low: f64,
    pub m: f64,
    pub r_max: f64,
}

/// Grid scan for the two regime constants with `r = m + 1` and a
/// `1 - 1e-6` safety factor. A degenerate scan raises `r` by one and
/// retries, up to eight times.
pub fn lemma_constants(
    law: &EnergyLaw,
    delta_low: f64,
    m: f64,
    r_max: f64,
) -> Result<LemmaConstants> {
    if !(delta_low > 0.0 && m > delta_low) {
        return Err(Error::BadConfig(
            "reference band needs 0 < delta_low < m".into(),
        ));
    }
    let safety = 1.0 - 1e-6;
    let cells = 512usize;
    let mut r = m + 1.0;
    for _ in 0..8 {
        if r_max <= r {
            return Err(Error::BadConfig(
                "r_max must exceed the cutoff m + 1".into(),
            ));
        }
        let mut quad = f64::INFINITY;
        let mut tail = f64::INFINITY;
        for j in 0..=cells {
            let bar = delta_low + (m - delta_low) * j as f64 / cells as f64;
            for i in 0..cells {
                // offset rho nodes dodge exact coincidence with references
                let rho = (i as f64 + 0.5) / cells as f64 * r;
                let d = rho - bar;
                // skip a thin diagonal band: the entropy difference
                // cancels catastrophically there while the ratio
                // extends continuously across it
                if d.abs() < 1e-3 {
                    continue;
                }
                quad = quad.min(law.rel_entropy(rho, bar) / (d * d));
            }
            for i in 1..=cells {
                let rho = r + (r_max - r) * i as f64 / cells as f64;
                let d = rho - bar;
                tail = tail.min(law.rel_entropy(rho, bar) / d.abs().powf(law.gamma));
            }
        }
        if quad > 0.0 && tail > 0.0 && quad.is_finite() && tail.is_finite() {
            return Ok(LemmaConstants {
                c1: quad * safety,
                c2: tail * safety,
                r,
                delta_low,
                m,
                r_max,
            });
        }
        r += 1.0;
    }
    Err(Error::DegenerateConstants { rho: r, rho_bar: m })
}

/// Finite-volume state on the periodic unit interval.
#[derive(Clone, Debug)]
pub struct RelaxationState {
    pub eps: f64,
    pub dx: f64,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub time: f64,
}

impl RelaxationState {
    pub fn new(eps: f64, rho: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if rho.len() < 4 || rho.len() != m.len() {
            return Err(Error::GridMismatch);
        }
        if !(eps > 0.0) {
            return Err(Error::BadConfig("eps must be positive".into()));
        }
        if rho.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::NegativeDensity);
        }
        let dx = 1.0 / rho.len() as f64;
        Ok(RelaxationState {
            eps,
            dx,
            rho,
            m,
            time: 0.0,
        })
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx
    }

    pub fn max_wave_speed(&self, law: &EnergyLaw) -> f64 {
        self.rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| (m / r).abs() + (law.pressure_deriv(r) / self.eps).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn cfl_bound(&self, law: &EnergyLaw) -> f64 {
        0.4 * self.dx / self.max_wave_speed(law)
    }
}

/// One split step: Rusanov flux for the hyperbolic part, then the exact
/// friction factor `exp(-dt/eps)` on the momentum.
pub fn step_euler(state: &mut RelaxationState, law: &EnergyLaw, dt: f64) -> Result<()> {
    let bound = state.cfl_bound(law);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let j = state.rho.len();
    let flux = |r: f64, m: f64| (m, m * m / r + law.pressure(r) / state.eps);
    let speed = |r: f64, m: f64| (m / r).abs() + (law.pressure_deriv(r) / state.eps).sqrt();
    let mut frho = vec![0.0; j];
    let mut fm = vec![0.0; j];
    for i in 0..j {
        let ir = (i + 1) % j;
        let (f0, g0) = flux(state.rho[i], state.m[i]);
        let (f1, g1) = flux(state.rho[ir], state.m[ir]);
        let a = speed(state.rho[i], state.m[i]).max(speed(state.rho[ir], state.m[ir]));
        frho[i] = 0.5 * (f0 + f1) - 0.5 * a * (state.rho[ir] - state.rho[i]);
        fm[i] = 0.5 * (g0 + g1) - 0.5 * a * (state.m[ir] - state.m[i]);
    }
    let lam = dt / state.dx;
    let damp = (-dt / state.eps).exp();
    for i in 0..j {
        let il = (i + j - 1) % j;
        state.rho[i] -= lam * (frho[i] - frho[il]);
        state.m[i] -= lam * (fm[i] - fm[il]);
        state.m[i] *= damp;
    }
    if state.rho.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::NegativeDensity);
    }
    state.time += dt;
    Ok(())
}

/// Explicit step of the limit equation `rho_t = p(rho)_xx`.
pub fn step_diffusion(rho: &mut [f64], law: &EnergyLaw, dx: f64, dt: f64) -> Result<()> {
    let max_dp = rho
        .iter()
        .map(|&r| law.pressure_deriv(r))
        .fold(0.0, f64::max);
    let bound = dx * dx / (2.0 * max_dp);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let j = rho.len();
    let p: Vec<f64> = rho.iter().map(|&r| law.pressure(r)).collect();
    let lam = dt / (dx * dx);
    let old: Vec<f64> = rho.to_vec();
    for i in 0..j {
        let il = (i + j - 1) % j;
        let ir = (i + 1) % j;
        rho[i] = old[i] + lam * (p[ir] - 2.0 * p[i] + p[il]);
    }
    Ok(())
}

/// Darcy velocity of the reference, `u = -d/dx h'(bar)`, by centered
/// differences.
pub fn reference_velocity(bar: &[f64], law: &EnergyLaw, dx: f64) -> Vec<f64> {
    let j = bar.len();
    (0..j)
        .map(|i| {
            let il = (i + j - 1) % j;
            let ir = (i + 1) % j;
            -(law.entropy_deriv(bar[ir]) - law.entropy_deriv(bar[il])) / (2.0 * dx)
        })
        .collect()
}

/// Scaled relative energy
/// `Psi_eps = int eps^2/2 rho |u - ubar|^2 + h(rho | bar) dx`.
pub fn relative_energy(state: &RelaxationState, bar: &[f64], law: &EnergyLaw) -> Result<f64> {
    if bar.len() != state.rho.len() {
        return Err(Error::GridMismatch);
    }
    let ubar = reference_velocity(bar, law, state.dx);
    let mut total = 0.0;
    for i in 0..bar.len() {
        // (m - rho ubar) / rho rather than m / rho - ubar: identical
        // analytically, but exactly zero on well-prepared data
        let du = (state.m[i] - state.rho[i] * ubar[i]) / state.rho[i];
        total += 0.5 * state.eps * state.eps * state.rho[i] * du * du
            + law.rel_entropy(state.rho[i], bar[i]);
    }
    Ok(total * state.dx)
}

/// Entropy split across the density cutoff: the trimmed quadratic
/// deviation carried by the witness `B = {rho <= r}`, the measure of
/// its complement, and the total relative entropy. The comparison
/// lemma turns the total into a bound on the first two.
#[derive(Clone, Copy, Debug)]
pub struct EntropySplit {
    pub trimmed_l2: f64,
    pub complement_measure: f64,
    pub entropy_total: f64,
}

pub fn entropy_split(
    state: &RelaxationState,
    bar: &[f64],
    constants: &LemmaConstants,
    law: &EnergyLaw,
) -> Result<EntropySplit> {
    if bar.len() != state.rho.len() {
        return Err(Error::GridMismatch);
    }
    let mut trimmed = 0.0;
    let mut total = 0.0;
    let mut out = 0usize;
    for i in 0..bar.len() {
        if bar[i] < constants.delta_low || bar[i] > constants.m {
            return Err(Error::BadConfig(
                "reference density leaves the certified band".into(),
            ));
        }
        let d = state.rho[i] - bar[i];
        total += law.rel_entropy(state.rho[i], bar[i]);
        if state.rho[i] <= constants.r {
            trimmed += d * d;
        } else {
            out += 1;
        }
    }
    Ok(EntropySplit {
        trimmed_l2: trimmed * state.dx,
        complement_measure: out as f64 * state.dx,
        entropy_total: total * state.dx,
    })
}

#[derive(Clone, Debug)]
pub struct RelaxConfig {
    pub cells: usize,
    pub law: EnergyLaw,
    pub t_end: f64,
    pub epsilons: Vec<f64>,
    /// Rows are recorded every `record_every` accepted Euler steps.
    pub record_every: usize,
    /// Certified reference band for the comparison constants.
    pub delta_low: f64,
    pub m_ref: f64,
    /// Upper end of the tail regime scanned for `c2`.
    pub r_max: f64,
    /// Start from `u = ubar` (exactly zero relative energy) rather
    /// than from rest.
    pub well_prepared: bool,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        RelaxConfig {
            cells: 128,
            law: EnergyLaw { gamma: 2.0, k: 1.0 },
            t_end: 0.25,
            epsilons: vec![0.25, 0.0625, 0.015625],
            record_every: 64,
            delta_low: 0.5,
            m_ref: 2.0,
            r_max: 8.0,
            well_prepared: true,
        }
    }
}

/// One recorded row of the experiment.
#[derive(Clone, Copy, Debug)]
pub struct RelaxSample {
    pub time: f64,
    pub eps: f64,
    pub psi: f64,
    pub entropy_total: f64,
    pub trimmed_l2: f64,
    pub complement_measure: f64,
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct RelaxationRun {
    pub constants: LemmaConstants,
    pub samples: Vec<RelaxSample>,
    /// Final-time row per epsilon, in the order configured.
    pub finals: Vec<RelaxSample>,
}

fn initial_density(cells: usize) -> Vec<f64> {
    (0..cells)
        .map(|i| {
            let x = (i as f64 + 0.5) / cells as f64;
            1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).cos()
        })
        .collect()
}

/// Well-prepared momentum `m0 = rho0 * ubar(0)`, so the relative
/// energy starts at exactly zero.
fn initial_momentum(rho: &[f64], law: &EnergyLaw, dx: f64) -> Vec<f64> {
    let ubar = reference_velocity(rho, law, dx);
    rho.iter().zip(&ubar).map(|(&r, &u)| r * u).collect()
}

/// Runs the relaxing system for each epsilon against the shared
/// diffusion reference, recording the relative energy and the
/// entropy split at the cutoff from the comparison lemma.
pub fn relaxation_experiment(config: &RelaxConfig) -> Result<RelaxationRun> {
    if config.cells < 8 || config.epsilons.is_empty() || !(config.t_end > 0.0) {
        return Err(Error::BadConfig("bad relaxation configuration".into()));
    }
    let law = &config.law;
    let rho0 = initial_density(config.cells);
    let constants = lemma_constants(law, config.delta_low, config.m_ref, config.r_max)?;
    let dx = 1.0 / config.cells as f64;
    let mut samples = Vec::new();
    let mut finals = Vec::new();
    for &eps in &config.epsilons {
        let mut bar_eps = rho0.clone();
        let mut bar_time_eps = 0.0f64;
        let m0 = if config.well_prepared {
            initial_momentum(&rho0, law, dx)
        } else {
            vec![0.0; config.cells]
        };
        let mut state = RelaxationState::new(eps, rho0.clone(), m0)?;
        let mut steps = 0usize;
        let record = |state: &RelaxationState, bar: &[f64]| -> Result<RelaxSample> {
            let psi = relative_energy(state, bar, law)?;
            let split = entropy_split(state, bar, &constants, law)?;
            let sample = RelaxSample {
                time: state.time,
                eps,
                psi,
                entropy_total: split.entropy_total,
                trimmed_l2: split.trimmed_l2,
                complement_measure: split.complement_measure,
                mass: state.mass(),
            };
            Ok(sample)
        };
        samples.push(record(&state, &bar_eps)?);
        while state.time < config.t_end {
            let mut dt = state.cfl_bound(law).min(config.t_end - state.time);
            let mut halvings = 0;
            loop {
                let mut trial = state.clone();
                match step_euler(&mut trial, law, dt) {
                    Ok(()) => {
                        state = trial;
                        break;
                    }
                    Err(Error::NegativeDensity) | Err(Error::CflViolation { .. })
                        if halvings < 20 =>
                    {
                        dt *= 0.5;
                        halvings += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            // keep the reference in lockstep with this run
            while bar_time_eps < state.time {
                let max_dp = bar_eps
                    .iter()
                    .map(|&r| law.pressure_deriv(r))
                    .fold(0.0, f64::max);
                let bdt = (0.9 * dx * dx / (2.0 * max_dp)).min(state.time - bar_time_eps);
                step_diffusion(&mut bar_eps, law, dx, bdt)?;
                bar_time_eps += bdt;
            }
            steps += 1;
            if steps % config.record_every == 0 {
                samples.push(record(&state, &bar_eps)?);
            }
        }
        let last = record(&state, &bar_eps)?;
        samples.push(last);
        finals.push(last);
    }
    Ok(RelaxationRun {
        constants,
        samples,
        finals,
    })
}
