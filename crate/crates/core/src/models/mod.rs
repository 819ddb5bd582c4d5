//! Drift and diffusion coefficients of the finite-N SDEs, the truncated
//! limit drifts, and the logarithmic-derivative decomposition.

pub(crate) mod drift;
mod logderiv;
pub(crate) mod truncated;

pub use drift::{drift_all, drift_finite, drift_and_gaps, MIN_DISTANCE};
pub use logderiv::{cutoff_chi, log_derivative, pair_log_derivative, reconstruct_drift, LogDerivDecomposition};
pub use truncated::{airy_tail_integral, drift_limit_at, drift_limit_truncated};

use serde::{Deserialize, Serialize};

use crate::domain::{Family, ModelSpec};
use crate::error::{Error, Result};

/// Which of the two Ginibre limit equations the truncated drift follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GinibreVariant {
    /// Window |x_i - x_j| < r, no confinement.
    Centered,
    /// Window |x_j| < r, with the -x_i confinement.
    Origin,
}

/// Reference density used for the Airy tail compensator
/// `int_{|x|<r} rho(x) / (-x) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeDensity {
    /// rho(x) = sqrt(-x) on x < 0; compensator 2 sqrt(r).
    #[default]
    Unnormalized,
    /// rho(x) = sqrt(-x) / pi on x < 0, the actual soft-edge intensity of the
    /// scaled ensemble; compensator 2 sqrt(r) / pi.
    Semicircle,
}

impl EdgeDensity {
    pub fn tail_integral(self, r: f64) -> Result<f64> {
        let base = airy_tail_integral(r)?;
        Ok(match self {
            EdgeDensity::Unnormalized => base,
            EdgeDensity::Semicircle => base / std::f64::consts::PI,
        })
    }
}

/// Truncation of the limit drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    /// Spatial window radius.
    pub r: f64,
    /// Plateau radius of the cutoff function.
    pub s: f64,
    /// Ginibre only.
    pub variant: Option<GinibreVariant>,
    /// Airy only.
    #[serde(default)]
    pub edge_density: EdgeDensity,
}

impl TruncationParams {
    pub fn new(r: f64, s: f64) -> Self {
        TruncationParams {
            r,
            s,
            variant: None,
            edge_density: EdgeDensity::default(),
        }
    }

    pub fn ginibre(r: f64, s: f64, variant: GinibreVariant) -> Self {
        TruncationParams {
            variant: Some(variant),
            ..Self::new(r, s)
        }
    }

    pub fn validate(&self, family: Family) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::invalid("r", "truncation radius must be positive"));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::invalid("s", "cutoff radius must be positive"));
        }
        match (family == Family::Ginibre, self.variant) {
            (true, None) => Err(Error::invalid("variant", "Ginibre truncation needs a variant")),
            (false, Some(_)) => Err(Error::invalid("variant", "only Ginibre takes a variant")),
            _ => Ok(()),
        }
    }
}

/// Diffusion matrix a = sigma sigma^T of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffusionSpec {
    Identity,
    /// sigma(x) = 2 sqrt(x), a(x) = 4x.
    SquareBessel4x,
}

impl DiffusionSpec {
    pub fn of(spec: &ModelSpec) -> Self {
        match spec.family {
            Family::SquareBessel => DiffusionSpec::SquareBessel4x,
            _ => DiffusionSpec::Identity,
        }
    }

    /// sigma at a position (first coordinate is used for the scalar families).
    #[inline]
    pub fn sigma(self, x: &[f64]) -> f64 {
        match self {
            DiffusionSpec::Identity => 1.0,
            DiffusionSpec::SquareBessel4x => 2.0 * x[0].max(0.0).sqrt(),
        }
    }

    #[inline]
    pub fn a(self, x: &[f64]) -> f64 {
        match self {
            DiffusionSpec::Identity => 1.0,
            DiffusionSpec::SquareBessel4x => 4.0 * x[0],
        }
    }

    /// Divergence term (nabla_x a) component `k`.
    #[inline]
    pub fn grad_a(self, _x: &[f64], _k: usize) -> f64 {
        match self {
            DiffusionSpec::Identity => 0.0,
            DiffusionSpec::SquareBessel4x => 4.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diffusion_is_sigma_squared() {
        for x in [0.01, 1.0, 37.5] {
            let d = DiffusionSpec::SquareBessel4x;
            assert!((d.sigma(&[x]).powi(2) - d.a(&[x])).abs() < 1e-12 * d.a(&[x]));
            assert!(d.a(&[x]) > 0.0);
        }
        assert_eq!(DiffusionSpec::Identity.a(&[3.0]), 1.0);
    }

    #[test]
    fn truncation_variant_matches_family() {
        assert!(TruncationParams::new(1.0, 1.0).validate(Family::Ginibre).is_err());
        assert!(TruncationParams::ginibre(1.0, 1.0, GinibreVariant::Origin)
            .validate(Family::AiryBeta)
            .is_err());
        assert!(TruncationParams::new(0.0, 1.0).validate(Family::AiryBeta).is_err());
        assert!(TruncationParams::new(1.0, 1.0).validate(Family::AiryBeta).is_ok());
    }
}
