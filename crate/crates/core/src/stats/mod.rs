//! Estimators and diagnostics: correlation intensities, KS distances,
//! truncated-drift scans, Erf tail sums and fourth-moment increments.

mod correlation;

pub use correlation::{
    estimate_rho, freedman_diaconis, BinAxis, Binning, CorrelationEstimate, MIN_BIN_WIDTH,
    PALM_MIN_COUNT,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::domain::{Configuration, Family, LabelScheme, LabeledState, ModelSpec};
use crate::error::{Error, Result};
use crate::models::{drift_limit_at, GinibreVariant, TruncationParams};
use crate::numeric::mean_stderr;
use crate::sde::PathEnsemble;

/// Upper normal tail (2 pi)^(-1/2) int_t^inf exp(-x^2 / 2) dx.
pub fn erf_fn(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("ks_distance", "samples must be non-empty"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::invalid("ks_one_sample", "sample must be non-empty"));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max((i as f64 + 1.0) / n - f)
    }))
}

/// One radius of a truncated-drift scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    /// Ensemble mean of the drift (one entry per coordinate).
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Ginibre: mean and standard error of |Centered - Origin|.
    pub variant_gap: Option<(f64, f64)>,
}

/// Minimum number of environments accepted by `drift_truncation_scan`.
pub const MIN_SCAN_SAMPLES: usize = 100;

/// Truncated limit drift at a fixed test position for each radius,
/// averaged over environment samples. `template` supplies s, the edge
/// density and (for Ginibre) the variant reported in `mean`.
pub fn drift_truncation_scan(
    env_samples: &[Configuration],
    spec: &ModelSpec,
    x: &[f64],
    r_list: &[f64],
    template: &TruncationParams,
) -> Result<Vec<ScanRow>> {
    if env_samples.len() < MIN_SCAN_SAMPLES {
        return Err(Error::invalid(
            "env_samples",
            format!("need at least {MIN_SCAN_SAMPLES} environments, got {}", env_samples.len()),
        ));
    }
    let d = spec.dimension();
    r_list
        .iter()
        .map(|&r| {
            let trunc = TruncationParams { r, ..*template };
            let drifts: Vec<Vec<f64>> = env_samples
                .par_iter()
                .map(|env| drift_limit_at(spec, x, env, &trunc))
                .collect::<Result<_>>()?;
            let (mut mean, mut stderr) = (Vec::with_capacity(d), Vec::with_capacity(d));
            for k in 0..d {
                let col: Vec<f64> = drifts.iter().map(|v| v[k]).collect();
                let (m, s) = mean_stderr(&col);
                mean.push(m);
                stderr.push(s);
            }
            let variant_gap = if spec.family == Family::Ginibre {
                let gaps: Vec<f64> = env_samples
                    .par_iter()
                    .map(|env| {
                        let c = TruncationParams {
                            variant: Some(GinibreVariant::Centered),
                            ..trunc
                        };
                        let o = TruncationParams {
                            variant: Some(GinibreVariant::Origin),
                            ..trunc
                        };
                        let bc = drift_limit_at(spec, x, env, &c)?;
                        let bo = drift_limit_at(spec, x, env, &o)?;
                        let diff: Vec<f64> = bc.iter().zip(&bo).map(|(a, b)| a - b).collect();
                        Ok(crate::numeric::norm(&diff))
                    })
                    .collect::<Result<_>>()?;
                Some(mean_stderr(&gaps))
            } else {
                None
            };
            Ok(ScanRow {
                r,
                mean,
                stderr,
                variant_gap,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessParams {
    pub r: f64,
    pub l: usize,
    pub t: f64,
    /// Uniform bound on the diffusion coefficient.
    pub c3: f64,
    pub q: f64,
}

impl TightnessParams {
    pub fn validate(&self) -> Result<()> {
        for (k, v) in [("r", self.r), ("t", self.t), ("c3", self.c3), ("q", self.q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(k, "must be positive"));
            }
        }
        if self.l == 0 {
            return Err(Error::invalid("l", "must be positive"));
        }
        Ok(())
    }
}

/// For each L: sum over labels i > L of the sample mean of
/// Erf((|s_i| - r) / (sqrt(c3) T)). Labels must be modulus-ordered.
pub fn erf_tail_sum(
    samples: &[LabeledState],
    params: &TightnessParams,
    l_list: &[usize],
) -> Result<Vec<f64>> {
    params.validate()?;
    if samples.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    if let Some(s) = samples.iter().find(|s| {
        s.scheme() != LabelScheme::AscendingModulus || !s.is_ordered()
    }) {
        return Err(Error::invalid(
            "samples",
            format!("labels must be modulus-ordered, got {:?}", s.scheme()),
        ));
    }
    let n_max = samples.iter().map(|s| s.len()).max().unwrap_or(0);
    let scale = params.c3.sqrt() * params.t;
    // per-label mean, then suffix sums from the top label down
    let mut per_label = vec![0.0; n_max];
    for s in samples {
        for (i, v) in per_label.iter_mut().enumerate().take(s.len()) {
            let m = crate::numeric::norm(s.position(i));
            *v += erf_fn((m - params.r) / scale);
        }
    }
    let mut suffix = vec![0.0; n_max + 1];
    for i in (0..n_max).rev() {
        suffix[i] = suffix[i + 1] + per_label[i] / samples.len() as f64;
    }
    Ok(l_list.iter().map(|&l| suffix[l.min(n_max)]).collect())
}

/// Fourth moment of increments at one lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub lag: f64,
    pub moment: f64,
    pub stderr: f64,
    /// Paths kept by the modulus restriction.
    pub n_paths: usize,
}

/// E|X_t - X_u|^4 at each lag (in recording steps), over particles
/// `0..m` and all time pairs at that lag, restricted to paths whose
/// running maximum modulus of the first m particles stays at most `a`.
pub fn holder_moment(ens: &PathEnsemble, lags: &[usize], m: usize, a: f64) -> Result<Vec<HolderRow>> {
    let n_records = ens.times.len();
    if let Some(&l) = lags.iter().find(|&&l| l >= n_records) {
        return Err(Error::invalid("lags", format!("lag {l} exceeds the recorded grid")));
    }
    let dt = if n_records > 1 {
        ens.times[1] - ens.times[0]
    } else {
        0.0
    };
    let kept: Vec<_> = ens
        .paths
        .iter()
        .filter(|p| {
            p.states.iter().all(|s| {
                (0..m.min(s.len())).all(|i| crate::numeric::norm(s.position(i)) <= a)
            })
        })
        .collect();
    lags.iter()
        .map(|&lag| {
            // per-path averages, so the standard error is over independent paths
            let per_path: Vec<f64> = kept
                .iter()
                .map(|p| {
                    let mut acc = crate::numeric::CompensatedSum::new();
                    let mut count = 0usize;
                    for w in 0..p.states.len().saturating_sub(lag) {
                        let (s0, s1) = (&p.states[w], &p.states[w + lag]);
                        for i in 0..m.min(s0.len()) {
                            let d2 = crate::numeric::dist2(s0.position(i), s1.position(i));
                            acc.add(d2 * d2);
                            count += 1;
                        }
                    }
                    if count == 0 {
                        0.0
                    } else {
                        acc.value() / count as f64
                    }
                })
                .collect();
            let (moment, stderr) = if per_path.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_stderr(&per_path)
            };
            Ok(HolderRow {
                lag: lag as f64 * dt,
                moment,
                stderr,
                n_paths: kept.len(),
            })
        })
        .collect()
}

/// Diffusion bound c3 for a family: 1 for unit noise, sup 4x over the
/// samples for the square Bessel family.
pub fn diffusion_bound(spec: &ModelSpec, samples: &[LabeledState]) -> f64 {
    if spec.family == Family::SquareBessel {
        samples
            .iter()
            .flat_map(|s| s.coords().iter().copied())
            .fold(0.0f64, |m, x| m.max(4.0 * x))
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{label, RngStream};
    use crate::sde::{simulate, IntegratorConfig};

    #[test]
    fn erf_symmetry_and_quadrature() {
        assert_eq!(erf_fn(0.0), 0.5);
        for t in [0.3, 1.7, 4.0] {
            assert!((erf_fn(t) + erf_fn(-t) - 1.0).abs() < 1e-15);
        }
        // trapezoid on [1, 12] with a fine grid
        let n = 200_000;
        let h = 11.0 / n as f64;
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = 0.5 * (f(1.0) + f(12.0));
        for k in 1..n {
            s += f(1.0 + k as f64 * h);
        }
        assert!((erf_fn(1.0) - s * h).abs() < 1e-10);
    }

    #[test]
    fn ks_bounds() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_distance(&a, &[10.0, 11.0]).unwrap(), 1.0);
        let u: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        assert!(ks_one_sample(&u, |x| x).unwrap() <= 0.005 + 1e-12);
    }

    #[test]
    fn ks_two_gaussian_samples_noise_floor() {
        use rand_distr::{Distribution, StandardNormal};
        let mut r1 = RngStream::new(1, 0).rng();
        let mut r2 = RngStream::new(2, 0).rng();
        let a: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut r1)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut r2)).collect();
        assert!(ks_distance(&a, &b).unwrap() <= 0.03);
    }

    #[test]
    fn empty_environment_scan_is_closed_form() {
        let empty = vec![Configuration::empty(1); MIN_SCAN_SAMPLES];
        let spec = ModelSpec::airy(10, 2.0);
        let rows =
            drift_truncation_scan(&empty, &spec, &[0.0], &[4.0, 9.0], &TruncationParams::new(1.0, 1.0))
                .unwrap();
        assert_eq!(rows[0].mean, vec![-4.0]);
        assert_eq!(rows[1].mean, vec![-6.0]);
        let g = vec![Configuration::empty(2); MIN_SCAN_SAMPLES];
        let t = TruncationParams::ginibre(1.0, 1.0, GinibreVariant::Origin);
        let rows = drift_truncation_scan(&g, &ModelSpec::ginibre(5), &[0.5, 0.0], &[2.0], &t).unwrap();
        assert_eq!(rows[0].mean, vec![-0.5, 0.0]);
        assert_eq!(rows[0].variant_gap, Some((0.5, 0.0)));
        assert!(drift_truncation_scan(&g[..10], &ModelSpec::ginibre(5), &[0.0, 0.0], &[2.0], &t).is_err());
    }

    fn modulus_labeled(points: &[f64]) -> LabeledState {
        label(&Configuration::from_1d(points).unwrap(), LabelScheme::AscendingModulus).unwrap()
    }

    #[test]
    fn erf_tail_sum_properties() {
        let p = TightnessParams {
            r: 5.0,
            l: 1,
            t: 1.0,
            c3: 1.0,
            q: 1.0,
        };
        let s = vec![modulus_labeled(&[0.5, -1.0, 3.0, -7.0]), modulus_labeled(&[0.1, 2.0, -4.0, 9.0])];
        let v = erf_tail_sum(&s, &p, &[0, 1, 2, 3, 4, 10]).unwrap();
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(v[4], 0.0);
        assert_eq!(v[5], 0.0);
        let wider = erf_tail_sum(&s, &TightnessParams { r: 6.0, ..p }, &[0, 2]).unwrap();
        assert!(wider[0] >= v[0] && wider[1] >= v[2]);
        let unordered =
            LabeledState::from_ordered(1, vec![3.0, 1.0], LabelScheme::AscendingModulus).unwrap();
        assert!(erf_tail_sum(&[unordered], &p, &[0]).is_err());
    }

    #[test]
    fn brownian_fourth_moment() {
        let spec = ModelSpec::ginibre(1);
        let cfg = IntegratorConfig {
            dt: 0.01,
            dt_record: 0.01,
            t_final: 0.08,
            drift_scale: 0.0,
            ..IntegratorConfig::default()
        };
        let x0 = LabeledState::from_ordered(2, vec![0.0, 0.0], LabelScheme::AscendingModulus).unwrap();
        let ens = simulate(&spec, &vec![x0; 4000], &cfg, 17).unwrap();
        let rows = holder_moment(&ens, &[0, 2, 4], 1, f64::INFINITY).unwrap();
        assert_eq!(rows[0].moment, 0.0);
        // planar Brownian motion: E|B_h|^4 = 8 h^2
        for row in &rows[1..] {
            let want = 8.0 * row.lag * row.lag;
            assert!((row.moment - want).abs() < 4.0 * row.stderr, "{row:?} vs {want}");
        }
    }
}
