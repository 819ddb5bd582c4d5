//! Adaptive Euler-Maruyama integration of the finite-N SDEs and the
//! truncated limit equations.

mod step;

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{LabeledState, ModelSpec, RngStream};
use crate::error::{Error, Result};
use crate::models::TruncationParams;
use step::Stepper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Replace a non-positive coordinate by its absolute value.
    #[default]
    Reflect,
    /// Discard the substep and retry at half the step.
    RejectStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    EulerMaruyama,
    /// Drift replaced by b / (1 + h|b|).
    TamedEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftMode {
    #[default]
    Finite,
    Truncated(TruncationParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Recording interval; must be a whole multiple of `dt`.
    pub dt_record: f64,
    pub max_substep_depth: u32,
    /// Upper bound on |b| h per substep.
    pub drift_cap_delta: f64,
    /// |b| h is also kept below this fraction of the nearest gap.
    pub gap_fraction: f64,
    /// sigma sqrt(h) is kept below this fraction of the nearest gap.
    pub noise_gap_fraction: f64,
    pub boundary_policy: BoundaryPolicy,
    pub scheme: Scheme,
    pub drift_mode: DriftMode,
    /// Test hook: multiplies the diffusion coefficient.
    pub noise_scale: f64,
    /// Test hook: multiplies the drift.
    pub drift_scale: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_final: 1.0,
            dt_record: 1e-2,
            max_substep_depth: 30,
            drift_cap_delta: 0.1,
            gap_fraction: 0.1,
            noise_gap_fraction: 0.1,
            boundary_policy: BoundaryPolicy::Reflect,
            scheme: Scheme::EulerMaruyama,
            drift_mode: DriftMode::Finite,
            noise_scale: 1.0,
            drift_scale: 1.0,
        }
    }
}

/// `a / b` as an integer if it is one up to rounding.
fn whole_ratio(a: f64, b: f64) -> Option<u64> {
    let q = a / b;
    let k = q.round();
    ((q - k).abs() <= 1e-9 * q.max(1.0) && k >= 0.0).then_some(k as u64)
}

impl IntegratorConfig {
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(key, "must be positive and finite"))
            }
        };
        positive("dt", self.dt)?;
        positive("dt_record", self.dt_record)?;
        positive("drift_cap_delta", self.drift_cap_delta)?;
        positive("gap_fraction", self.gap_fraction)?;
        positive("noise_gap_fraction", self.noise_gap_fraction)?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final", "must be >= 0 and finite"));
        }
        if self.max_substep_depth > 30 {
            return Err(Error::invalid("max_substep_depth", "must be <= 30"));
        }
        if !(self.noise_scale >= 0.0 && self.drift_scale >= 0.0) {
            return Err(Error::invalid("noise_scale", "test hooks must be >= 0"));
        }
        if whole_ratio(self.dt_record, self.dt).is_none_or(|k| k == 0) {
            return Err(Error::invalid("dt_record", "must be a positive multiple of dt"));
        }
        if whole_ratio(self.t_final, self.dt_record).is_none() {
            return Err(Error::invalid("t_final", "must be a multiple of dt_record"));
        }
        if let DriftMode::Truncated(t) = &self.drift_mode {
            t.validate(spec.family)?;
        }
        Ok(())
    }

    fn steps_per_record(&self) -> u64 {
        whole_ratio(self.dt_record, self.dt).unwrap_or(1)
    }

    fn n_records(&self) -> u64 {
        whole_ratio(self.t_final, self.dt_record).unwrap_or(0)
    }

    /// Recording grid t_k = k dt_record, k = 0..=T/dt_record.
    pub fn record_times(&self) -> Vec<f64> {
        (0..=self.n_records()).map(|k| k as f64 * self.dt_record).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubstepStats {
    pub substeps: u64,
    pub max_depth: u32,
    pub reflections: u64,
    /// 1D pairs reflected after crossing at the depth floor.
    pub pair_reflections: u64,
}

/// One recorded path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub path_id: usize,
    pub seed: u64,
    /// Index of the first record (non-zero after a restart).
    pub first_record: u64,
    pub states: Vec<LabeledState>,
    pub stats: SubstepStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    pub paths: Vec<Trajectory>,
    /// Adjacent-pair order swaps over all recorded steps (1D families).
    pub ordering_violations: Option<usize>,
    pub wall_time_secs: f64,
}

impl PathEnsemble {
    /// Coordinates of every path at record `k`.
    pub fn states_at(&self, k: usize) -> impl Iterator<Item = &LabeledState> {
        self.paths.iter().map(move |p| &p.states[k])
    }

    pub fn total_substeps(&self) -> u64 {
        self.paths.iter().map(|p| p.stats.substeps).sum()
    }

    pub fn max_depth(&self) -> u32 {
        self.paths.iter().map(|p| p.stats.max_depth).max().unwrap_or(0)
    }
}

/// Advances `state` by one base step `dt` with the adaptive scheme.
pub fn step<R: Rng + ?Sized>(
    spec: &ModelSpec,
    state: &LabeledState,
    dt: f64,
    rng: &mut R,
    cfg: &IntegratorConfig,
) -> Result<LabeledState> {
    let mut stepper = Stepper::new(spec, cfg);
    let mut next = state.clone();
    stepper.advance(next.coords_mut(), 0.0, dt, rng)?;
    Ok(next)
}

fn check_initial(spec: &ModelSpec, state: &LabeledState) -> Result<()> {
    if state.len() != spec.n_particles || state.dim() != spec.dimension() {
        return Err(Error::invalid(
            "initial",
            format!(
                "expected {} particles in dimension {}, got {} in dimension {}",
                spec.n_particles,
                spec.dimension(),
                state.len(),
                state.dim()
            ),
        ));
    }
    if spec.family.is_bessel() {
        if let Some(i) = state.coords().iter().position(|&x| x <= 0.0) {
            return Err(Error::Domain {
                index: i,
                value: state.coords()[i],
            });
        }
    }
    Ok(())
}

/// Integrates one path from record `first_record` to the end of the grid.
///
/// Record interval k draws its noise from block k of `stream`, so a path
/// restarted from its state at record k reproduces the remaining records.
pub fn simulate_path(
    spec: &ModelSpec,
    initial: &LabeledState,
    cfg: &IntegratorConfig,
    stream: RngStream,
    first_record: u64,
) -> Result<Trajectory> {
    spec.validate()?;
    cfg.validate(spec)?;
    check_initial(spec, initial)?;
    let n_records = cfg.n_records();
    if first_record > n_records {
        return Err(Error::OutOfRange {
            what: "first_record",
            value: first_record as f64,
            min: 0.0,
            max: n_records as f64,
        });
    }
    let mut stepper = Stepper::new(spec, cfg);
    let steps = cfg.steps_per_record();
    let mut state = initial.clone();
    let mut states = Vec::with_capacity((n_records - first_record + 1) as usize);
    states.push(state.clone());
    for k in first_record..n_records {
        let mut rng = stream.rng_at_block(k);
        let t0 = k as f64 * cfg.dt_record;
        for s in 0..steps {
            stepper.advance(state.coords_mut(), t0 + s as f64 * cfg.dt, cfg.dt, &mut rng)?;
        }
        if let Some(i) = state.coords().iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                index: i / state.dim(),
                value: state.coords()[i],
            });
        }
        states.push(state.clone());
    }
    Ok(Trajectory {
        path_id: stream.stream_id as usize,
        seed: stream.seed,
        first_record,
        states,
        stats: SubstepStats {
            substeps: stepper.substeps,
            max_depth: stepper.max_depth,
            reflections: stepper.reflections,
            pair_reflections: stepper.pair_reflections,
        },
    })
}

/// Simulates one path per initial state; path p uses stream (seed, p).
pub fn simulate(
    spec: &ModelSpec,
    initial: &[LabeledState],
    cfg: &IntegratorConfig,
    seed: u64,
) -> Result<PathEnsemble> {
    spec.validate()?;
    cfg.validate(spec)?;
    let start = Instant::now();
    let paths: Vec<Trajectory> = initial
        .par_iter()
        .enumerate()
        .map(|(p, x0)| {
            simulate_path(spec, x0, cfg, RngStream::new(seed, p as u64), 0).map_err(|e| {
                Error::Path {
                    path: p,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut ens = PathEnsemble {
        times: cfg.record_times(),
        paths,
        ordering_violations: None,
        wall_time_secs: 0.0,
    };
    if spec.dimension() == 1 {
        ens.ordering_violations = Some(check_ordering(&ens)?);
    }
    ens.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(ens)
}

/// Number of adjacent label pairs whose order flipped between consecutive
/// records, summed over paths.
pub fn check_ordering(ens: &PathEnsemble) -> Result<usize> {
    let mut count = 0;
    for path in &ens.paths {
        let Some(first) = path.states.first() else {
            continue;
        };
        if first.dim() != 1 {
            return Err(Error::invalid("check_ordering", "defined for 1D families only"));
        }
        for w in path.states.windows(2) {
            let (a, b) = (w[0].coords(), w[1].coords());
            for i in 1..a.len() {
                let before = a[i - 1] <= a[i];
                let after = b[i - 1] <= b[i];
                if before != after {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Writes `t,path_id,particle_id,x[,y[,z]]` rows.
pub fn write_trajectories_csv<W: Write>(out: &mut W, ens: &PathEnsemble) -> Result<()> {
    let dim = ens
        .paths
        .first()
        .and_then(|p| p.states.first())
        .map_or(1, |s| s.dim());
    let cols = ["x", "x,y", "x,y,z"][dim - 1];
    writeln!(out, "t,path_id,particle_id,{cols}")?;
    for path in &ens.paths {
        let offset = path.first_record as usize;
        for (k, state) in path.states.iter().enumerate() {
            let t = ens.times.get(k + offset).copied().unwrap_or(f64::NAN);
            for i in 0..state.len() {
                write!(out, "{t},{},{i}", path.path_id)?;
                for v in state.position(i) {
                    write!(out, ",{v}")?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}
