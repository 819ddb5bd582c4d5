//! Special functions and the exact determinantal kernels used as ground
//! truth: Airy, hard-edge Bessel and Ginibre.

mod airy;
mod bessel;
pub(crate) mod ddouble;
mod det;
mod ginibre;

pub use airy::{airy_fn, airy_kernel, AIRY_DIAG_DELTA, AIRY_MAX, AIRY_MIN};
pub use bessel::{bessel_j, bessel_j_prime, bessel_kernel, bessel_kernel_derivative_form, BESSEL_X_MAX};
pub use ginibre::{ginibre_correlation, ginibre_kernel};


use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Configuration;
use crate::error::{Error, Result};

/// Largest point set accepted by [`correlation_det`].
pub const MAX_DET_POINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelId {
    Airy2,
    Bessel2Alpha,
    Ginibre,
}

impl std::str::FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "airy" | "airy2" => Ok(KernelId::Airy2),
            "bessel" | "bessel2-alpha" => Ok(KernelId::Bessel2Alpha),
            "ginibre" => Ok(KernelId::Ginibre),
            other => Err(Error::invalid("kernel", format!("unknown kernel `{other}`"))),
        }
    }
}

/// A kernel together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub id: KernelId,
    /// Bessel only.
    pub alpha: Option<f64>,
}

impl KernelSpec {
    pub fn airy() -> Self {
        KernelSpec {
            id: KernelId::Airy2,
            alpha: None,
        }
    }

    pub fn bessel(alpha: f64) -> Self {
        KernelSpec {
            id: KernelId::Bessel2Alpha,
            alpha: Some(alpha),
        }
    }

    pub fn ginibre() -> Self {
        KernelSpec {
            id: KernelId::Ginibre,
            alpha: None,
        }
    }

    pub fn dimension(&self) -> usize {
        match self.id {
            KernelId::Ginibre => 2,
            _ => 1,
        }
    }

    fn alpha(&self) -> Result<f64> {
        self.alpha
            .ok_or_else(|| Error::invalid("alpha", "the Bessel kernel needs alpha"))
    }

    /// K(x, y); real kernels return a zero imaginary part.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        if x.len() != self.dimension() || y.len() != self.dimension() {
            return Err(Error::invalid("points", "dimension does not match the kernel"));
        }
        Ok(match self.id {
            KernelId::Airy2 => airy_kernel(x[0], y[0])?.into(),
            KernelId::Bessel2Alpha => bessel_kernel(self.alpha()?, x[0], y[0])?.into(),
            KernelId::Ginibre => ginibre_kernel([x[0], x[1]], [y[0], y[1]]),
        })
    }

    /// One-point density K(x, x).
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x, x)?.re)
    }
}

/// Kernel evaluated on all pairs of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub kernel: KernelSpec,
    pub points: Configuration,
    /// Row-major, `values[i * n + j] = K(x_i, x_j)`.
    pub values: Vec<Complex64>,
}

impl KernelGrid {
    /// Evaluates the kernel matrix, rows in parallel.
    pub fn new(kernel: KernelSpec, points: Configuration) -> Result<Self> {
        if !points.is_empty() && points.dim() != kernel.dimension() {
            return Err(Error::invalid("points", "dimension does not match the kernel"));
        }
        let n = points.len();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| kernel.eval(points.point(i), points.point(j)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(KernelGrid {
            kernel,
            points,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.len() + j]
    }

    /// det of the kernel matrix.
    pub fn determinant(&self) -> f64 {
        det::det(self.values.clone(), self.len()).re
    }
}

/// Correlation function rho^m(x_1, ..., x_m) = det[K(x_i, x_j)].
pub fn correlation_det(kernel: &KernelSpec, points: &Configuration) -> Result<f64> {
    if points.len() > MAX_DET_POINTS {
        return Err(Error::TooManyPoints {
            got: points.len(),
            max: MAX_DET_POINTS,
        });
    }
    if points.is_empty() {
        return Ok(1.0);
    }
    if kernel.id == KernelId::Ginibre {
        return ginibre_correlation(points);
    }
    let n = points.len();
    let mut m = Vec::with_capacity(n * n);
    for x in points.points() {
        for y in points.points() {
            m.push(kernel.eval(x, y)?.re);
        }
    }
    Ok(det::det(m, n))
}
