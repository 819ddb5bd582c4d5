use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::numeric::{norm, CompensatedSum};

use super::drift::{check_domain, FamilyParams, MIN_DISTANCE};
use super::DiffusionSpec;

/// Split of the logarithmic derivative at a point into free part, near-field
/// interaction and far-field remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDerivDecomposition {
    pub u: Vec<f64>,
    pub g_s: Vec<f64>,
    pub r_s: Vec<f64>,
}

impl LogDerivDecomposition {
    /// u + g_s + r_s.
    pub fn total(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.g_s)
            .zip(&self.r_s)
            .map(|((u, g), r)| u + g + r)
            .collect()
    }
}

/// Smooth radial cutoff: 1 on |x| <= s, 0 on |x| >= s + 1, with the
/// smoothstep 3t^2 - 2t^3 in between.
pub fn cutoff_chi(s: f64, x: &[f64]) -> f64 {
    chi_radial(s, norm(x))
}

#[inline]
fn chi_radial(s: f64, r: f64) -> f64 {
    let t = r - s;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// Pair kernel g(x, y) of the logarithmic derivative.
pub fn pair_log_derivative(spec: &ModelSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    let d = spec.dimension();
    if x.len() != d || y.len() != d {
        return Err(Error::invalid("x", "dimension mismatch"));
    }
    let p = FamilyParams::new(spec);
    let mut out = vec![0.0; d];
    pair_term(&p, x, y, 0, &mut out)?;
    Ok(out)
}

fn pair_term(p: &FamilyParams, x: &[f64], y: &[f64], j: usize, out: &mut [f64]) -> Result<f64> {
    let d = p.dim;
    let mut r = [0.0f64; 3];
    let mut d2 = 0.0;
    for k in 0..d {
        r[k] = x[k] - y[k];
        d2 += r[k] * r[k];
    }
    if d2 < MIN_DISTANCE * MIN_DISTANCE {
        return Err(Error::TestPointCollision {
            j,
            distance: d2.sqrt(),
        });
    }
    match p.family {
        Family::AiryBeta => out[0] = p.beta / r[0],
        Family::Bessel2Alpha | Family::SquareBessel => out[0] = 2.0 / r[0],
        Family::SqrtSquareBessel => out[0] = 4.0 * x[0] / (x[0] * x[0] - y[0] * y[0]),
        Family::Ginibre => {
            for k in 0..d {
                out[k] = 2.0 * r[k] / d2;
            }
        }
        Family::LennardJones612 => {
            let (d8, d14) = (d2.powi(4), d2.powi(7));
            for k in 0..d {
                out[k] = p.beta * (12.0 * r[k] / d14 - 6.0 * r[k] / d8);
            }
        }
        Family::Riesz => {
            let den = p.riesz_denominator(d2);
            for k in 0..d {
                out[k] = p.beta * r[k] / den;
            }
        }
    }
    Ok(d2.sqrt())
}

fn free_term(p: &FamilyParams, x: &[f64], out: &mut [f64]) {
    match p.family {
        Family::AiryBeta => out[0] = -p.beta * (p.n_cbrt + x[0] / (2.0 * p.n_cbrt)),
        Family::Ginibre => {
            for k in 0..p.dim {
                out[k] = -2.0 * x[k];
            }
        }
        Family::Bessel2Alpha | Family::SquareBessel => {
            out[0] = -1.0 / (4.0 * p.n) + p.alpha / x[0];
        }
        Family::SqrtSquareBessel => out[0] = -x[0] / (2.0 * p.n) + (2.0 * p.alpha + 1.0) / x[0],
        Family::LennardJones612 | Family::Riesz => {
            for k in 0..p.dim {
                out[k] = -p.beta * p.free.gradient(x[k], p.n_particles);
            }
        }
    }
}

/// Logarithmic derivative of the N-particle density at `x` with the other
/// particles at `env`, split by the cutoff of radius `s`.
pub fn log_derivative(
    spec: &ModelSpec,
    x: &[f64],
    env: &Configuration,
    s: f64,
) -> Result<LogDerivDecomposition> {
    spec.validate()?;
    let d = spec.dimension();
    if x.len() != d || (!env.is_empty() && env.dim() != d) {
        return Err(Error::invalid("x", "dimension mismatch"));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", "cutoff radius must be positive"));
    }
    let p = FamilyParams::new(spec);
    check_domain(&p, 0, x[0])
        .map_err(|_| Error::invalid("x", "test position must lie in (0, inf)"))?;
    let mut u = vec![0.0; d];
    free_term(&p, x, &mut u);
    let mut near = [CompensatedSum::new(); 3];
    let mut far = [CompensatedSum::new(); 3];
    let mut g = [0.0f64; 3];
    for (j, y) in env.points().enumerate() {
        let dist = pair_term(&p, x, y, j, &mut g[..d])?;
        let chi = chi_radial(s, dist);
        for k in 0..d {
            near[k].add(chi * g[k]);
            far[k].add((1.0 - chi) * g[k]);
        }
    }
    Ok(LogDerivDecomposition {
        u,
        g_s: near[..d].iter().map(CompensatedSum::value).collect(),
        r_s: far[..d].iter().map(CompensatedSum::value).collect(),
    })
}

/// b = (1/2){grad a + a (u + g_s + r_s)}.
pub fn reconstruct_drift(spec: &ModelSpec, x: &[f64], dec: &LogDerivDecomposition) -> Vec<f64> {
    let diff = DiffusionSpec::of(spec);
    let a = diff.a(x);
    dec.total()
        .iter()
        .enumerate()
        .map(|(k, dk)| 0.5 * (diff.grad_a(x, k) + a * dk))
        .collect()
}
