use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use super::config::RunConfig;
use super::CommandKind;
use crate::domain::{
    label, read_configurations_csv, write_configurations_csv, Configuration, Family, LabelScheme,
    LabeledState, ModelSpec,
};
use crate::error::{Error, Result};
use crate::kernels::{airy_kernel, ginibre_kernel, KernelId};
use crate::numeric::ols_slope;
use crate::sampling::sample_many;
use crate::sde::{simulate, write_trajectories_csv, PathEnsemble};
use crate::stats::{
    diffusion_bound, drift_truncation_scan, erf_tail_sum, estimate_rho, holder_moment, BinAxis,
};
use crate::verify::suite_checks;

/// Result of a subcommand: overall pass flag and the one-line JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Value,
}

/// Runs one subcommand with a resolved configuration, writing artifacts and
/// the echoed config into `cfg.output`.
pub fn run(kind: CommandKind, cfg: &RunConfig) -> Result<Outcome> {
    std::fs::create_dir_all(&cfg.output)?;
    std::fs::write(
        cfg.output.join("config.toml"),
        toml::to_string(cfg).map_err(|e| Error::invalid("config", e.to_string()))?,
    )?;
    let (passed, mut summary) = match kind {
        CommandKind::Sample => run_sample(cfg)?,
        CommandKind::Simulate => run_simulate(cfg)?,
        CommandKind::Kernel => run_kernel(cfg)?,
        CommandKind::Correlate => run_correlate(cfg)?,
        CommandKind::DriftDiag => run_drift_diag(cfg)?,
        CommandKind::Tightness => run_tightness(cfg)?,
        CommandKind::Moments => run_moments(cfg)?,
        CommandKind::Verify => run_verify(cfg)?,
    };
    let obj = summary.as_object_mut().expect("summary object");
    obj.insert("command".into(), json!(command_name(kind)));
    obj.insert("passed".into(), json!(passed));
    obj.insert("seed".into(), json!(cfg.seed));
    obj.insert("output".into(), json!(cfg.output));
    std::fs::write(cfg.output.join("summary.json"), format!("{summary}\n"))?;
    Ok(Outcome { passed, summary })
}

fn command_name(kind: CommandKind) -> &'static str {
    match kind {
        CommandKind::Sample => "sample",
        CommandKind::Simulate => "simulate",
        CommandKind::Kernel => "kernel",
        CommandKind::Correlate => "correlate",
        CommandKind::DriftDiag => "drift-diag",
        CommandKind::Tightness => "tightness",
        CommandKind::Moments => "moments",
        CommandKind::Verify => "verify",
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Equilibrium samples, from `input` when given. Fresh samples use
/// streams (seed, k).
fn environments(cfg: &RunConfig, spec: &ModelSpec, count: usize) -> Result<Vec<Configuration>> {
    match &cfg.input {
        Some(p) => {
            let v = read_configurations_csv(BufReader::new(File::open(p)?))?;
            if v.is_empty() {
                return Err(Error::invalid("input", "no configurations in file"));
            }
            if v.iter().any(|c| c.dim() != spec.dimension()) {
                return Err(Error::invalid("input", "dimension does not match the model"));
            }
            Ok(v)
        }
        None => {
            let sampler = cfg.sampler.sampler_config()?;
            Ok(sample_many(spec, count, cfg.seed, &sampler)?.0)
        }
    }
}

fn run_sample(cfg: &RunConfig) -> Result<(bool, Value)> {
    let spec = cfg.model.spec()?;
    let sampler = cfg.sampler.sampler_config()?;
    let (samples, report) = sample_many(&spec, cfg.sampler.n_samples, cfg.seed, &sampler)?;
    let mut out = create(&cfg.output, "samples.csv")?;
    write_configurations_csv(&mut out, &samples)?;
    out.flush()?;
    Ok((
        true,
        json!({
            "model": spec.family.name(),
            "n": spec.n_particles,
            "n_samples": report.n_samples,
            "acceptance_rate": report.acceptance_rate,
            "wall_time_secs": report.wall_time_secs,
        }),
    ))
}

/// Starts from equilibrium (streams (seed, p)) and integrates with streams
/// (seed + 1, p) so that noise and initial states are independent.
fn path_ensemble(cfg: &RunConfig, spec: &ModelSpec) -> Result<PathEnsemble> {
    cfg.integrator
        .validate(spec)
        .map_err(|e| match e {
            Error::InvalidParameter { key, reason } => Error::InvalidParameter {
                key: format!("integrator.{key}"),
                reason,
            },
            other => other,
        })?;
    if cfg.simulate.n_paths == 0 {
        return Err(Error::invalid("simulate.n_paths", "must be positive"));
    }
    let starts = environments(cfg, spec, cfg.simulate.n_paths)?;
    if starts.iter().any(|c| c.len() != spec.n_particles) {
        return Err(Error::invalid("input", "particle count does not match model.n"));
    }
    let initial: Vec<LabeledState> = starts
        .iter()
        .map(|c| label(c, spec.default_scheme()))
        .collect::<Result<_>>()?;
    simulate(spec, &initial, &cfg.integrator, cfg.seed.wrapping_add(1))
}

fn run_simulate(cfg: &RunConfig) -> Result<(bool, Value)> {
    let spec = cfg.model.spec()?;
    let ens = path_ensemble(cfg, &spec)?;
    let mut out = create(&cfg.output, "trajectories.csv")?;
    write_trajectories_csv(&mut out, &ens)?;
    out.flush()?;
    let reflections: u64 = ens.paths.iter().map(|p| p.stats.reflections).sum();
    let pair_reflections: u64 = ens.paths.iter().map(|p| p.stats.pair_reflections).sum();
    Ok((
        ens.ordering_violations.unwrap_or(0) == 0,
        json!({
            "model": spec.family.name(),
            "n": spec.n_particles,
            "n_paths": ens.paths.len(),
            "records": ens.times.len(),
            "ordering_violations": ens.ordering_violations,
            "substeps": ens.total_substeps(),
            "max_depth": ens.max_depth(),
            "reflections": reflections,
            "pair_reflections": pair_reflections,
            "wall_time_secs": ens.wall_time_secs,
        }),
    ))
}

fn run_kernel(cfg: &RunConfig) -> Result<(bool, Value)> {
    let kernel = cfg.kernel.spec()?;
    let grid = cfg.kernel.grid_points()?;
    // the Ginibre kernel is evaluated on the real axis
    let point = |g: f64| match kernel.id {
        KernelId::Ginibre => vec![g, 0.0],
        _ => vec![g],
    };
    let pairs: Vec<(f64, f64)> = if cfg.kernel.matrix {
        grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect()
    } else {
        grid.iter().map(|&x| (x, x)).collect()
    };
    let mut out = create(&cfg.output, "kernel.csv")?;
    writeln!(out, "x,y,K")?;
    let mut k_min = f64::INFINITY;
    let mut k_max = f64::NEG_INFINITY;
    for (x, y) in &pairs {
        let k = kernel.eval(&point(*x), &point(*y))?.re;
        k_min = k_min.min(k);
        k_max = k_max.max(k);
        writeln!(out, "{x},{y},{k}")?;
    }
    out.flush()?;
    Ok((
        true,
        json!({
            "kernel": cfg.kernel.kernel,
            "points": grid.len(),
            "rows": pairs.len(),
            "k_min": k_min,
            "k_max": k_max,
        }),
    ))
}

/// Kernel one-point density at a bin centre, where the kernel describes
/// the sampled law.
fn reference_density(spec: &ModelSpec, axis: BinAxis, c: f64) -> Option<Result<f64>> {
    match (spec.family, axis) {
        (Family::AiryBeta, BinAxis::Linear) if spec.beta == 2.0 => Some(airy_kernel(c, c)),
        (Family::Ginibre, BinAxis::Radial) => Some(Ok(ginibre_kernel([c, 0.0], [c, 0.0]).re)),
        _ => None,
    }
}

fn run_correlate(cfg: &RunConfig) -> Result<(bool, Value)> {
    let spec = cfg.model.spec()?;
    let d = &cfg.diagnostics;
    let samples = environments(cfg, &spec, cfg.sampler.n_samples)?;
    let bins = d.binning(spec.dimension(), &samples)?;
    let est = estimate_rho(&samples, d.order, &bins)?;
    let mut out = create(&cfg.output, "correlation.csv")?;
    let palm = est.palm.is_some();
    write!(out, "lo,hi,count,density,stderr")?;
    if palm {
        write!(out, ",palm")?;
    }
    writeln!(out)?;
    let mut worst: Option<f64> = None;
    for b in 0..est.counts.len() {
        let (lo, hi) = (bins.edges[b], bins.edges[b + 1]);
        write!(out, "{lo},{hi},{},{},{}", est.counts[b], est.density[b], est.stderr[b])?;
        if let Some(p) = &est.palm {
            write!(out, ",{}", p[b])?;
        }
        writeln!(out)?;
        if let (1, Some([a, z])) = (d.order, d.compare) {
            if lo >= a && hi <= z {
                let c = 0.5 * (lo + hi);
                let r = reference_density(&spec, bins.axis, c).ok_or_else(|| {
                    Error::invalid("diagnostics.compare", "no reference kernel for this model and axis")
                })??;
                let e = (est.density[b] - r).abs();
                worst = Some(worst.map_or(e, |w: f64| w.max(e)));
            }
        }
    }
    out.flush()?;
    let passed = worst.map_or(true, |w| w <= d.correlate_tol);
    Ok((
        passed,
        json!({
            "model": spec.family.name(),
            "order": d.order,
            "bins": est.counts.len(),
            "n_samples": est.n_samples,
            "anchor_count": est.anchor_count,
            "max_reference_discrepancy": worst,
            "tolerance": d.correlate_tol,
        }),
    ))
}

fn run_drift_diag(cfg: &RunConfig) -> Result<(bool, Value)> {
    let spec = cfg.model.spec()?;
    let d = &cfg.diagnostics;
    let x = d.test_position(&spec)?;
    let template = d.truncation(&spec)?;
    let envs = environments(cfg, &spec, cfg.sampler.n_samples)?;
    let rows = drift_truncation_scan(&envs, &spec, &x, &d.r_list, &template)?;
    let dim = spec.dimension();
    let ginibre = spec.family == Family::Ginibre;
    let mut out = create(&cfg.output, "drift_scan.csv")?;
    let mut header = vec!["r".to_string()];
    header.extend((0..dim).map(|k| format!("mean_{k}")));
    header.extend((0..dim).map(|k| format!("stderr_{k}")));
    if ginibre {
        header.extend(["gap_mean".into(), "gap_stderr".into()]);
    }
    writeln!(out, "{}", header.join(","))?;
    for row in &rows {
        let mut cells = vec![row.r.to_string()];
        cells.extend(row.mean.iter().map(|v| v.to_string()));
        cells.extend(row.stderr.iter().map(|v| v.to_string()));
        if let Some((m, s)) = row.variant_gap {
            cells.extend([m.to_string(), s.to_string()]);
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    // Ginibre: the variant gap must shrink; otherwise the last three radii
    // must show a Cauchy trend within tolerance
    let (passed, stat) = if ginibre {
        let gaps: Vec<f64> = rows.iter().filter_map(|r| r.variant_gap.map(|g| g.0)).collect();
        let dec = gaps.windows(2).all(|w| w[1] < w[0]);
        (dec, json!({ "variant_gaps": gaps }))
    } else if rows.len() >= 3 {
        let m: Vec<f64> = rows.iter().map(|r| r.mean[0]).collect();
        let k = m.len();
        let last = (m[k - 1] - m[k - 2]).abs();
        let prev = (m[k - 2] - m[k - 3]).abs();
        (
            last <= prev && last <= d.drift_tol,
            json!({ "last_increment": last, "previous_increment": prev }),
        )
    } else {
        (true, json!({}))
    };
    Ok((
        passed,
        json!({
            "model": spec.family.name(),
            "x": x,
            "radii": d.r_list,
            "n_environments": envs.len(),
            "trend": stat,
            "tolerance": d.drift_tol,
        }),
    ))
}

fn run_tightness(cfg: &RunConfig) -> Result<(bool, Value)> {
    let spec = cfg.model.spec()?;
    let d = &cfg.diagnostics;
    let envs = environments(cfg, &spec, cfg.sampler.n_samples)?;
    let labeled: Vec<LabeledState> = envs
        .iter()
        .map(|c| label(c, LabelScheme::AscendingModulus))
        .collect::<Result<_>>()?;
    let c3 = d.c3.unwrap_or_else(|| diffusion_bound(&spec, &labeled));
    let l_list = d.l_list(spec.n_particles);
    let params = d.tightness(c3, l_list.first().copied().unwrap_or(1))?;
    let values = erf_tail_sum(&labeled, &params, &l_list)?;
    let mut out = create(&cfg.output, "tightness.csv")?;
    writeln!(out, "L,value")?;
    for (l, v) in l_list.iter().zip(&values) {
        writeln!(out, "{l},{v}")?;
    }
    out.flush()?;
    let mut order: Vec<(usize, f64)> = l_list.iter().copied().zip(values.iter().copied()).collect();
    order.sort_by_key(|p| p.0);
    let monotone = order.windows(2).all(|w| w[1].1 <= w[0].1);
    let ratio = match (order.first(), order.last()) {
        (Some(a), Some(b)) if b.1 > 0.0 => a.1 / b.1,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => f64::NAN,
    };
    Ok((
        monotone && ratio >= d.tightness_ratio,
        json!({
            "model": spec.family.name(),
            "c3": c3,
            "monotone": monotone,
            "first_to_last_ratio": if ratio.is_finite() { json!(ratio) } else { json!("inf") },
            "tolerance": d.tightness_ratio,
        }),
    ))
}

fn run_moments(cfg: &RunConfig) -> Result<(bool, Value)> {
    let spec = cfg.model.spec()?;
    let d = &cfg.diagnostics;
    let ens = path_ensemble(cfg, &spec)?;
    let m = d.m.min(spec.n_particles);
    let rows = holder_moment(&ens, &d.lags, m, d.a)?;
    let mut out = create(&cfg.output, "moments.csv")?;
    writeln!(out, "lag,moment,stderr,n_paths")?;
    for r in &rows {
        writeln!(out, "{},{},{},{}", r.lag, r.moment, r.stderr, r.n_paths)?;
    }
    out.flush()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.lag > 0.0 && r.moment > 0.0)
        .map(|r| (r.lag.ln(), r.moment.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Some(ols_slope(&x, &y))
    } else {
        None
    };
    let [lo, hi] = d.slope_range;
    Ok((
        slope.is_some_and(|s| (lo..=hi).contains(&s)),
        json!({
            "model": spec.family.name(),
            "n_paths": ens.paths.len(),
            "slope": slope,
            "slope_range": d.slope_range,
        }),
    ))
}

fn run_verify(cfg: &RunConfig) -> Result<(bool, Value)> {
    let mut out = create(&cfg.output, "verify.csv")?;
    writeln!(out, "id,name,passed,value,threshold,seconds,detail")?;
    let mut failed = Vec::new();
    let mut count = 0;
    for check in suite_checks(cfg.verify.suite) {
        let o = check.run(cfg.seed)?;
        eprintln!("{o}");
        writeln!(
            out,
            "{},{},{},{},{},{},\"{}\"",
            o.id,
            o.name,
            o.passed,
            o.value,
            o.threshold,
            o.seconds,
            o.detail.replace('"', "\"\"")
        )?;
        out.flush()?;
        count += 1;
        if !o.passed {
            failed.push(o.id);
        }
    }
    Ok((
        failed.is_empty(),
        json!({ "suite": cfg.verify.suite, "checks": count, "failed": failed }),
    ))
}
