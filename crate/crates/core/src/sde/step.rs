use rand::Rng;
use rand_distr::StandardNormal;

use super::{BoundaryPolicy, DriftMode, IntegratorConfig, Scheme};
use crate::domain::ModelSpec;
use crate::error::{Error, Result};
use crate::models::drift::{drift_and_gaps_with, FamilyParams, MIN_DISTANCE};
use crate::models::truncated::limit_drift;
use crate::models::DiffusionSpec;

/// Per-path integrator workspace.
pub(crate) struct Stepper<'a> {
    params: FamilyParams,
    diffusion: DiffusionSpec,
    cfg: &'a IntegratorConfig,
    drift: Vec<f64>,
    gaps: Vec<f64>,
    trial: Vec<f64>,
    pub substeps: u64,
    pub max_depth: u32,
    pub reflections: u64,
    pub pair_reflections: u64,
}

impl<'a> Stepper<'a> {
    pub fn new(spec: &ModelSpec, cfg: &'a IntegratorConfig) -> Self {
        let n = spec.n_particles;
        let d = spec.dimension();
        Stepper {
            params: FamilyParams::new(spec),
            diffusion: DiffusionSpec::of(spec),
            cfg,
            drift: vec![0.0; n * d],
            gaps: vec![0.0; n],
            trial: vec![0.0; n * d],
            substeps: 0,
            max_depth: 0,
            reflections: 0,
            pair_reflections: 0,
        }
    }

    fn evaluate(&mut self, coords: &[f64]) -> Result<()> {
        match &self.cfg.drift_mode {
            DriftMode::Finite => {
                drift_and_gaps_with(&self.params, coords, &mut self.drift, &mut self.gaps)
            }
            DriftMode::Truncated(trunc) => {
                let d = self.params.dim;
                for (i, x) in coords.chunks_exact(d).enumerate() {
                    limit_drift(
                        &self.params,
                        x,
                        coords,
                        Some(i),
                        trunc,
                        &mut self.drift[i * d..(i + 1) * d],
                    )?;
                }
                nearest_gaps(&self.params, coords, &mut self.gaps)
            }
        }
    }

    /// Smallest k with dt / 2^k admissible for every particle, capped at
    /// the maximum depth. The flag is set when the cap was hit.
    ///
    /// Pair gaps bound both the drift and the noise displacement. The wall
    /// at 0 only bounds drift pointing at it; noise overshoot there is left
    /// to the boundary policy.
    fn depth_for(&self, coords: &[f64], dt: f64) -> (u32, bool) {
        let d = self.params.dim;
        let cfg = self.cfg;
        let bessel = self.params.family.is_bessel();
        let mut h_max = dt;
        for (i, x) in coords.chunks_exact(d).enumerate() {
            let b = &self.drift[i * d..(i + 1) * d];
            let mut speed = crate::numeric::norm(b) * cfg.drift_scale;
            if cfg.scheme == Scheme::TamedEuler {
                speed /= 1.0 + dt * speed;
            }
            let gap = self.gaps[i];
            let mut reach = cfg.drift_cap_delta.min(cfg.gap_fraction * gap);
            if bessel && b[0] < 0.0 {
                reach = reach.min(cfg.gap_fraction * x[0]);
            }
            if speed > 0.0 {
                h_max = h_max.min(reach / speed);
            }
            let sigma = self.diffusion.sigma(x) * cfg.noise_scale;
            if sigma > 0.0 && gap.is_finite() {
                let s = cfg.noise_gap_fraction * gap / sigma;
                h_max = h_max.min(s * s);
            }
        }
        let mut k = 0;
        let mut h = dt;
        while h > h_max {
            if k == cfg.max_substep_depth {
                return (k, true);
            }
            k += 1;
            h *= 0.5;
        }
        (k, false)
    }

    /// Reflects every neighbouring pair (in the order of `coords`) whose
    /// trial gap closed, keeping its midpoint. True if the result is safe.
    fn reflect_pairs(&mut self, coords: &[f64]) -> bool {
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ta, tb) = (self.trial[a], self.trial[b]);
            if tb - ta < MIN_DISTANCE {
                let mid = 0.5 * (ta + tb);
                let half = 0.5 * (tb - ta).abs().max(MIN_DISTANCE);
                self.trial[a] = mid - half;
                self.trial[b] = mid + half;
                self.pair_reflections += 1;
            }
        }
        self.trial_is_safe(coords)
    }

    /// Whether the trial move keeps every pair apart and, in 1D, in order.
    fn trial_is_safe(&self, coords: &[f64]) -> bool {
        let d = self.params.dim;
        let n = coords.len() / d;
        for i in 0..n {
            let (a, ta) = (&coords[i * d..(i + 1) * d], &self.trial[i * d..(i + 1) * d]);
            for j in i + 1..n {
                let (b, tb) = (&coords[j * d..(j + 1) * d], &self.trial[j * d..(j + 1) * d]);
                if crate::numeric::dist2(ta, tb).sqrt() < MIN_DISTANCE {
                    return false;
                }
                if d == 1 && (a[0] < b[0]) != (ta[0] < tb[0]) {
                    return false;
                }
            }
        }
        true
    }

    /// Advances `coords` from `t` by `dt`, subdividing as needed.
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        coords: &mut [f64],
        t: f64,
        dt: f64,
        rng: &mut R,
    ) -> Result<()> {
        let cfg = self.cfg;
        let d = self.params.dim;
        let bessel = self.params.family.is_bessel();
        // progress measured in units of dt / 2^max_depth to stay exact
        let unit_count: u64 = 1 << cfg.max_substep_depth;
        let mut done: u64 = 0;
        let mut reject_depth = 0;
        while done < unit_count {
            self.evaluate(coords)?;
            let now = t + dt * done as f64 / unit_count as f64;
            let (base, floored) = self.depth_for(coords, dt);
            // never step past the end of the interval or off the dyadic grid
            let mut k = base.max(reject_depth);
            while done % (1u64 << (cfg.max_substep_depth - k)) != 0 {
                k += 1;
            }
            if k > cfg.max_substep_depth {
                return Err(Error::StepFailure {
                    time: now,
                    depth: cfg.max_substep_depth,
                });
            }
            let h = dt / (1u64 << k) as f64;
            let sqrt_h = h.sqrt();
            let tamed = cfg.scheme == Scheme::TamedEuler;
            for (i, x) in coords.chunks_exact(d).enumerate() {
                let b = &self.drift[i * d..(i + 1) * d];
                let scale = if tamed {
                    1.0 / (1.0 + dt * crate::numeric::norm(b) * cfg.drift_scale)
                } else {
                    1.0
                };
                let sigma = self.diffusion.sigma(x) * cfg.noise_scale;
                for k in 0..d {
                    let xi: f64 = rng.sample(StandardNormal);
                    self.trial[i * d + k] =
                        x[k] + cfg.drift_scale * scale * b[k] * h + sigma * sqrt_h * xi;
                }
            }
            self.substeps += 1;
            self.max_depth = self.max_depth.max(k);
            // below the depth floor the step is only taken if it is harmless;
            // in 1D a crossed pair may instead be reflected, like the wall
            if floored && !self.trial_is_safe(coords) {
                let reflected = d == 1
                    && cfg.boundary_policy == BoundaryPolicy::Reflect
                    && self.reflect_pairs(coords);
                if !reflected {
                    return Err(Error::StepFailure {
                        time: now,
                        depth: cfg.max_substep_depth,
                    });
                }
            }
            if bessel && self.trial.iter().any(|&v| v <= 0.0) {
                match cfg.boundary_policy {
                    BoundaryPolicy::Reflect => {
                        for v in self.trial.iter_mut().filter(|v| **v <= 0.0) {
                            *v = v.abs().max(MIN_DISTANCE);
                            self.reflections += 1;
                        }
                    }
                    BoundaryPolicy::RejectStep => {
                        reject_depth = k + 1;
                        if reject_depth > cfg.max_substep_depth {
                            return Err(Error::StepFailure {
                                time: now,
                                depth: cfg.max_substep_depth,
                            });
                        }
                        continue;
                    }
                }
            }
            reject_depth = 0;
            coords.copy_from_slice(&self.trial);
            done += unit_count >> k;
        }
        Ok(())
    }
}

/// Distance of each particle to its nearest neighbour.
fn nearest_gaps(p: &FamilyParams, coords: &[f64], gaps: &mut [f64]) -> Result<()> {
    let d = p.dim;
    gaps.fill(f64::INFINITY);
    let pts: Vec<&[f64]> = coords.chunks_exact(d).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let g = crate::numeric::dist2(pts[i], pts[j]).sqrt();
            if g < MIN_DISTANCE {
                return Err(Error::SingularConfiguration { i, j, distance: g });
            }
            gaps[i] = gaps[i].min(g);
            gaps[j] = gaps[j].min(g);
        }
    }
    Ok(())
}
