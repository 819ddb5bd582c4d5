use serde::{Deserialize, Serialize};

use crate::domain::Configuration;
use crate::error::{Error, Result};

/// Smallest bin width used by the automatic rule.
pub const MIN_BIN_WIDTH: f64 = 0.05;
/// Anchor counts below this leave the Palm ratio undefined.
pub const PALM_MIN_COUNT: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinAxis {
    /// First coordinate; bin volume is its width.
    Linear,
    /// Euclidean modulus; bin volume is the shell volume in the model
    /// dimension.
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub axis: BinAxis,
    /// Strictly increasing edges.
    pub edges: Vec<f64>,
    /// Order 2 only: anchor points are restricted to this interval of the
    /// axis; the bins then index the separation |x - y|.
    pub anchor: Option<(f64, f64)>,
}

impl Binning {
    pub fn linear(edges: Vec<f64>) -> Self {
        Binning {
            axis: BinAxis::Linear,
            edges,
            anchor: None,
        }
    }

    pub fn radial(edges: Vec<f64>) -> Self {
        Binning {
            axis: BinAxis::Radial,
            edges,
            anchor: None,
        }
    }

    pub fn with_anchor(mut self, lo: f64, hi: f64) -> Self {
        self.anchor = Some((lo, hi));
        self
    }

    /// Equal-width edges covering `[lo, hi]`.
    pub fn uniform(axis: BinAxis, lo: f64, hi: f64, width: f64) -> Result<Self> {
        if !(hi > lo && width > 0.0) {
            return Err(Error::invalid("bins", "need hi > lo and width > 0"));
        }
        let n = ((hi - lo) / width).ceil().max(1.0) as usize;
        let edges = (0..=n).map(|k| lo + k as f64 * width).collect();
        Ok(Binning {
            axis,
            edges,
            anchor: None,
        })
    }

    /// Freedman-Diaconis width (floored at `MIN_BIN_WIDTH`) over the pooled
    /// axis values of `samples`.
    pub fn auto(axis: BinAxis, samples: &[Configuration]) -> Result<Self> {
        let mut v: Vec<f64> = samples
            .iter()
            .flat_map(|c| c.points().map(move |p| axis_value(axis, p)))
            .collect();
        if v.len() < 2 {
            return Err(Error::invalid("bins", "need at least two points for automatic bins"));
        }
        v.sort_by(f64::total_cmp);
        let width = freedman_diaconis(&v).max(MIN_BIN_WIDTH);
        let (lo, hi) = (v[0], v[v.len() - 1]);
        Binning::uniform(axis, lo, hi.max(lo + width) + 1e-12, width)
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len().saturating_sub(1)
    }

    fn validate(&self) -> Result<()> {
        if self.edges.len() < 2 || self.edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("bins", "edges must be strictly increasing, at least two"));
        }
        if self.axis == BinAxis::Radial && self.edges[0] < 0.0 {
            return Err(Error::invalid("bins", "radial edges must be >= 0"));
        }
        if let Some((lo, hi)) = self.anchor {
            if !(hi > lo) {
                return Err(Error::invalid("anchor", "need hi > lo"));
            }
        }
        Ok(())
    }

    fn find(&self, v: f64) -> Option<usize> {
        let e = &self.edges;
        if v < e[0] || v >= e[e.len() - 1] {
            return None;
        }
        Some(e.partition_point(|&x| x <= v) - 1)
    }
}

fn axis_value(axis: BinAxis, p: &[f64]) -> f64 {
    match axis {
        BinAxis::Linear => p[0],
        BinAxis::Radial => crate::numeric::norm(p),
    }
}

/// Volume of the shell a <= |x| < b in dimension d.
fn shell_volume(d: usize, a: f64, b: f64) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0 * (b - a),
        2 => PI * (b * b - a * a),
        _ => 4.0 / 3.0 * PI * (b.powi(3) - a.powi(3)),
    }
}

/// 2 IQR / n^(1/3) over sorted values.
pub fn freedman_diaconis(sorted: &[f64]) -> f64 {
    let q = |p: f64| {
        let pos = p * (sorted.len() - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos.fract());
        let j = (i + 1).min(sorted.len() - 1);
        sorted[i] * (1.0 - f) + sorted[j] * f
    };
    2.0 * (q(0.75) - q(0.25)) / (sorted.len() as f64).cbrt()
}

/// Binned correlation intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub order: u8,
    pub bins: Binning,
    pub counts: Vec<u64>,
    /// Per-unit-volume intensity.
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
    /// Order 2: points found in the anchor interval.
    pub anchor_count: Option<u64>,
    /// Order 2: rho2 / rho1(anchor), where the anchor holds more than
    /// `PALM_MIN_COUNT` points.
    pub palm: Option<Vec<f64>>,
}

/// Estimates rho^1 (order 1) or the anchored pair intensity (order 2).
///
/// Order 1: `density[b]` = mean count in bin b / volume(b).
/// Order 2: `density[b]` = mean number of ordered pairs (i, j), i != j, with
/// x_i in the anchor interval and |x_i - x_j| in bin b, divided by
/// |anchor| * shell volume(b); this is rho^2(x, y) averaged over the anchor
/// and the separation shell.
pub fn estimate_rho(
    samples: &[Configuration],
    order: u8,
    bins: &Binning,
) -> Result<CorrelationEstimate> {
    if samples.len() < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    bins.validate()?;
    let dim = samples[0].dim();
    if samples.iter().any(|c| c.dim() != dim) {
        return Err(Error::invalid("samples", "mixed dimensions"));
    }
    let nb = bins.n_bins();
    // per-sample counts, so the standard error reflects sample-to-sample spread
    let mut per_sample = vec![vec![0u64; nb]; samples.len()];
    let mut anchor_count = 0u64;
    let (anchor_len, volumes): (f64, Vec<f64>) = match order {
        1 => {
            for (c, row) in samples.iter().zip(per_sample.iter_mut()) {
                for p in c.points() {
                    if let Some(b) = bins.find(axis_value(bins.axis, p)) {
                        row[b] += 1;
                    }
                }
            }
            let vols = (0..nb)
                .map(|b| {
                    let (lo, hi) = (bins.edges[b], bins.edges[b + 1]);
                    match bins.axis {
                        BinAxis::Linear => hi - lo,
                        BinAxis::Radial => shell_volume(dim, lo, hi),
                    }
                })
                .collect();
            (1.0, vols)
        }
        2 => {
            let (lo, hi) = bins
                .anchor
                .ok_or_else(|| Error::invalid("anchor", "order 2 needs an anchor interval"))?;
            for (c, row) in samples.iter().zip(per_sample.iter_mut()) {
                let pts: Vec<&[f64]> = c.points().collect();
                for (i, x) in pts.iter().enumerate() {
                    let a = axis_value(bins.axis, x);
                    if a < lo || a >= hi {
                        continue;
                    }
                    anchor_count += 1;
                    for (j, y) in pts.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let s = crate::numeric::dist2(x, y).sqrt();
                        if let Some(b) = bins.find(s) {
                            row[b] += 1;
                        }
                    }
                }
            }
            let anchor_len = match bins.axis {
                BinAxis::Linear => hi - lo,
                BinAxis::Radial => shell_volume(dim, lo.max(0.0), hi),
            };
            let vols = (0..nb)
                .map(|b| shell_volume(dim, bins.edges[b], bins.edges[b + 1]))
                .collect();
            (anchor_len, vols)
        }
        _ => return Err(Error::invalid("order", "must be 1 or 2")),
    };
    let n = samples.len() as f64;
    let mut counts = vec![0u64; nb];
    let mut density = vec![0.0; nb];
    let mut stderr = vec![0.0; nb];
    for b in 0..nb {
        let scale = 1.0 / (anchor_len * volumes[b]);
        let vals: Vec<f64> = per_sample.iter().map(|r| r[b] as f64 * scale).collect();
        counts[b] = per_sample.iter().map(|r| r[b]).sum();
        let (m, se) = crate::numeric::mean_stderr(&vals);
        density[b] = m;
        stderr[b] = se;
    }
    let (anchor_count, palm) = if order == 2 {
        let rho1 = anchor_count as f64 / (n * anchor_len);
        let palm = (anchor_count > PALM_MIN_COUNT).then(|| density.iter().map(|d| d / rho1).collect());
        (Some(anchor_count), palm)
    } else {
        (None, None)
    };
    Ok(CorrelationEstimate {
        order,
        bins: bins.clone(),
        counts,
        density,
        stderr,
        n_samples: samples.len(),
        anchor_count,
        palm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_counts() {
        let c = Configuration::from_1d(&[0.3]).unwrap();
        let est = estimate_rho(&[c.clone(), c], 1, &Binning::linear(vec![0.0, 0.5])).unwrap();
        assert_eq!(est.counts, vec![2]);
        assert!((est.density[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn radial_bins_use_disc_area() {
        let c = Configuration::from_points(2, &[[0.1, 0.0], [0.0, 0.5]]).unwrap();
        let est = estimate_rho(&[c.clone(), c], 1, &Binning::radial(vec![0.0, 1.0])).unwrap();
        assert!((est.density[0] - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn factorial_moment_identity_one_box() {
        let samples: Vec<_> = (0..5)
            .map(|k| Configuration::from_1d(&[-1.0 + 0.1 * k as f64, 0.25, 0.7 + 0.05 * k as f64]).unwrap())
            .collect();
        let bins = Binning::uniform(BinAxis::Linear, -1.0, 1.0, 0.25).unwrap();
        let est = estimate_rho(&samples, 1, &bins).unwrap();
        let integral: f64 = (0..bins.n_bins()).map(|b| est.density[b] * 0.25).sum();
        let mean_count = samples.iter().map(|c| c.len()).sum::<usize>() as f64 / 5.0;
        assert!((integral - mean_count).abs() < 1e-12);
    }

    #[test]
    fn pair_intensity_of_a_lattice() {
        // points at 0, 1, 2 in every sample; anchor [0.5, 1.5) holds the middle one
        let c = Configuration::from_1d(&[0.0, 1.0, 2.0]).unwrap();
        let bins = Binning::linear(vec![0.5, 1.5, 2.5]).with_anchor(0.5, 1.5);
        let est = estimate_rho(&[c.clone(), c], 2, &bins).unwrap();
        // two neighbours at distance 1, shell volume 2
        assert_eq!(est.counts, vec![4, 0]);
        assert!((est.density[0] - 1.0).abs() < 1e-15);
        assert_eq!(est.anchor_count, Some(2));
        assert!(est.palm.is_none());
    }

    #[test]
    fn auto_bins_respect_floor() {
        let c = Configuration::from_1d(&[0.0, 0.001, 0.002, 0.003]).unwrap();
        let b = Binning::auto(BinAxis::Linear, &[c]).unwrap();
        assert!((b.edges[1] - b.edges[0] - MIN_BIN_WIDTH).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let c = Configuration::from_1d(&[0.0]).unwrap();
        assert!(estimate_rho(&[c.clone()], 1, &Binning::linear(vec![0.0, 1.0])).is_err());
        assert!(estimate_rho(&[c.clone(), c.clone()], 3, &Binning::linear(vec![0.0, 1.0])).is_err());
        assert!(estimate_rho(&[c.clone(), c], 1, &Binning::linear(vec![1.0, 0.0])).is_err());
    }
}
