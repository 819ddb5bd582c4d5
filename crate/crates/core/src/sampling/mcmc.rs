//! Random-walk Metropolis chains for the equilibria without an exact sampler.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, Family, FreePotential, ModelSpec};
use crate::error::{Error, Result};

/// Metropolis settings. Scales adapt per particle during the first half of
/// burn-in only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub burn_in_sweeps: usize,
    pub thin_sweeps: usize,
    pub target_acceptance: f64,
    pub initial_step: f64,
    pub adapt_every: usize,
    /// Switch the pair interaction off (Gibbs targets only).
    pub pair_interaction: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            burn_in_sweeps: 10_000,
            thin_sweeps: 10,
            target_acceptance: 0.3,
            initial_step: 0.5,
            adapt_every: 50,
            pair_interaction: true,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin_sweeps == 0 || self.adapt_every == 0 {
            return Err(Error::invalid("mcmc", "thin_sweeps and adapt_every must be positive"));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::invalid("mcmc.target_acceptance", "must lie in (0, 1)"));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid("mcmc.initial_step", "must be positive"));
        }
        Ok(())
    }
}

/// Acceptance band outside of which a chain is reported as not converged.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.1, 0.9);

enum Target {
    /// e^{-sum x/(4N)} prod x^alpha prod |x_k - x_l|^2 on (0, inf)^N.
    Bessel { n: f64, alpha: f64 },
    /// exp(-beta [sum Phi + sum Psi]) on R^3N.
    Gibbs {
        family: Family,
        n: usize,
        beta: f64,
        riesz_a: i32,
        free: FreePotential,
        interaction: bool,
    },
}

impl Target {
    fn from_spec(spec: &ModelSpec, cfg: &McmcConfig) -> Result<Self> {
        spec.validate()?;
        match spec.family {
            Family::Bessel2Alpha | Family::SquareBessel | Family::SqrtSquareBessel => {
                Ok(Target::Bessel {
                    n: spec.n_particles as f64,
                    alpha: spec.alpha_or_panic(),
                })
            }
            Family::LennardJones612 | Family::Riesz => Ok(Target::Gibbs {
                family: spec.family,
                n: spec.n_particles,
                beta: spec.beta,
                riesz_a: spec.riesz_a.unwrap_or(0) as i32,
                free: spec.free_or_default(),
                interaction: cfg.pair_interaction,
            }),
            f => Err(Error::invalid(
                "model",
                format!("{} has an exact sampler, not an MCMC target", f.name()),
            )),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Target::Bessel { .. } => 1,
            Target::Gibbs { .. } => 3,
        }
    }

    fn initial(&self, n: usize) -> Vec<f64> {
        match self {
            Target::Bessel { .. } => (0..n).map(|k| 16.0 * (k as f64 + 0.5).powi(2)).collect(),
            Target::Gibbs { .. } => {
                let side = (n as f64).cbrt().ceil() as usize;
                let offset = 0.5 * (side as f64 - 1.0);
                (0..n)
                    .flat_map(|k| {
                        let (a, b, c) = (k % side, (k / side) % side, k / (side * side));
                        [a, b, c].map(|v| 1.2 * (v as f64 - offset))
                    })
                    .collect()
            }
        }
    }

    /// Pair potential from the squared distance.
    fn psi(&self, d2: f64) -> f64 {
        match *self {
            Target::Gibbs { family: Family::LennardJones612, .. } => {
                let inv6 = 1.0 / (d2 * d2 * d2);
                inv6 * inv6 - inv6
            }
            Target::Gibbs { riesz_a, .. } => d2.sqrt().powi(-riesz_a) / riesz_a as f64,
            Target::Bessel { .. } => unreachable!(),
        }
    }

    /// log pi(new) - log pi(old) for moving particle `i`, plus the proposal
    /// correction.
    fn log_ratio(&self, coords: &[f64], i: usize, new: &[f64]) -> f64 {
        let d = self.dim();
        let old = &coords[i * d..(i + 1) * d];
        match *self {
            Target::Bessel { n, alpha } => {
                let (x, y) = (old[0], new[0]);
                let mut acc = -(y - x) / (4.0 * n) + (alpha + 1.0) * (y / x).ln();
                for (j, &z) in coords.iter().enumerate() {
                    if j != i {
                        acc += 2.0 * ((y - z).abs() / (x - z).abs()).ln();
                    }
                }
                acc
            }
            Target::Gibbs {
                n,
                beta,
                free,
                interaction,
                ..
            } => {
                let mut de = free.value(new, n) - free.value(old, n);
                if interaction {
                    for (j, p) in coords.chunks_exact(d).enumerate() {
                        if j != i {
                            de += self.psi(crate::numeric::dist2(new, p))
                                - self.psi(crate::numeric::dist2(old, p));
                        }
                    }
                }
                -beta * de
            }
        }
    }

    fn propose<R: Rng + ?Sized>(&self, old: &[f64], step: f64, rng: &mut R, out: &mut [f64]) {
        match self {
            // multiplicative move; its Hastings factor y/x is in log_ratio
            Target::Bessel { .. } => out[0] = old[0] * (step * rng.sample::<f64, _>(StandardNormal)).exp(),
            Target::Gibbs { .. } => {
                for (o, c) in out.iter_mut().zip(old) {
                    *o = c + step * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
    }
}

struct Chain {
    target: Target,
    coords: Vec<f64>,
    steps: Vec<f64>,
    window_accepted: Vec<u32>,
    accepted: u64,
    proposed: u64,
}

impl Chain {
    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R, count: bool) {
        let d = self.target.dim();
        let n = self.coords.len() / d;
        let mut buf = [0.0f64; 3];
        for i in 0..n {
            let new = &mut buf[..d];
            self.target
                .propose(&self.coords[i * d..(i + 1) * d], self.steps[i], rng, new);
            let lr = self.target.log_ratio(&self.coords, i, new);
            let accept = lr >= 0.0 || rng.random::<f64>() < lr.exp();
            if accept && lr.is_finite() {
                self.coords[i * d..(i + 1) * d].copy_from_slice(new);
                self.window_accepted[i] += 1;
                if count {
                    self.accepted += 1;
                }
            }
            if count {
                self.proposed += 1;
            }
        }
    }

    fn adapt(&mut self, window: usize, target: f64) {
        for (s, a) in self.steps.iter_mut().zip(self.window_accepted.iter_mut()) {
            let rate = *a as f64 / window as f64;
            *s = (*s * (2.0 * (rate - target)).exp()).clamp(1e-6, 1e6);
            *a = 0;
        }
    }
}

/// Runs one chain and returns `n_samples` thinned states plus the
/// acceptance rate after adaptation stopped.
pub fn run_chain<R: Rng + ?Sized>(
    spec: &ModelSpec,
    cfg: &McmcConfig,
    n_samples: usize,
    rng: &mut R,
) -> Result<(Vec<Configuration>, f64)> {
    cfg.validate()?;
    let target = Target::from_spec(spec, cfg)?;
    let n = spec.n_particles;
    let d = target.dim();
    let mut chain = Chain {
        coords: target.initial(n),
        target,
        steps: vec![cfg.initial_step; n],
        window_accepted: vec![0; n],
        accepted: 0,
        proposed: 0,
    };
    // scales adapt in the first half of burn-in only; acceptance is counted
    // from the second half on, where the kernel is fixed
    let adapt_until = cfg.burn_in_sweeps / 2;
    for sweep in 1..=cfg.burn_in_sweeps {
        chain.sweep(rng, sweep > adapt_until);
        if sweep <= adapt_until && sweep % cfg.adapt_every == 0 {
            chain.adapt(cfg.adapt_every, cfg.target_acceptance);
        }
    }
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        for _ in 0..cfg.thin_sweeps {
            chain.sweep(rng, true);
        }
        out.push(Configuration::new(d, chain.coords.clone())?);
    }
    let rate = if chain.proposed == 0 {
        0.0
    } else {
        chain.accepted as f64 / chain.proposed as f64
    };
    if n_samples > 0 && !(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(&rate) {
        return Err(Error::NonConvergence { rate });
    }
    Ok((out, rate))
}

/// One sample of the hard-edge equilibrium m_alpha^N.
pub fn sample_bessel_equilibrium<R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Configuration> {
    let spec = ModelSpec::bessel(n, alpha);
    let (mut v, _) = run_chain(&spec, &McmcConfig::default(), 1, rng)?;
    Ok(v.pop().expect("one sample"))
}

/// One Metropolis sample of a Lennard-Jones or Riesz Gibbs measure.
pub fn sample_gibbs_mcmc<R: Rng + ?Sized>(
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<Configuration> {
    sample_gibbs_mcmc_with(spec, &McmcConfig::default(), rng)
}

pub fn sample_gibbs_mcmc_with<R: Rng + ?Sized>(
    spec: &ModelSpec,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<Configuration> {
    if !spec.family.is_ruelle() {
        return Err(Error::invalid("model", "Gibbs MCMC is for Lennard-Jones and Riesz"));
    }
    let (mut v, _) = run_chain(spec, cfg, 1, rng)?;
    Ok(v.pop().expect("one sample"))
}
