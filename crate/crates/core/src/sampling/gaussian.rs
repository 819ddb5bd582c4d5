//! Gaussian beta ensembles at the soft edge and the complex Ginibre ensemble.

use faer::{c64, Mat, Side};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::tridiag::{eigenvalues_above, tridiag_eigenvalues};
use crate::domain::Configuration;
use crate::error::{Error, Result};

fn use_sequential_linalg() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("beta", "must be a positive finite number"))
    }
}

/// Soft-edge coordinate x = N^{1/6} (lambda - 2 sqrt(N)).
#[inline]
pub fn edge_scale(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    nf.powf(1.0 / 6.0) * (lambda - 2.0 * nf.sqrt())
}

/// Inverse of [`edge_scale`].
#[inline]
pub fn edge_unscale(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf.sqrt() + x / nf.powf(1.0 / 6.0)
}

/// Tridiagonal model with eigenvalue density prop. to
/// prod |l_i - l_j|^beta exp(-beta/4 sum l_k^2).
fn tridiagonal_model<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let sd = (2.0 / beta).sqrt();
    let diag: Vec<f64> = (0..n)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let chi2 = ChiSquared::new(beta * (n - k) as f64).expect("positive degrees of freedom");
            (chi2.sample(rng) / beta).sqrt()
        })
        .collect();
    (diag, off)
}

/// Unscaled eigenvalues of the tridiagonal beta model.
pub fn gbe_eigenvalues_tridiagonal<R: Rng + ?Sized>(
    n: usize,
    beta: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let (d, e) = tridiagonal_model(n, beta, rng);
    tridiag_eigenvalues(&d, &e)
}

/// One draw of the finite-N soft-edge ensemble, ascending.
pub fn sample_airy_equilibrium<R: Rng + ?Sized>(
    n: usize,
    beta: f64,
    rng: &mut R,
) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one particle is required"));
    }
    let ev = gbe_eigenvalues_tridiagonal(n, beta, rng)?;
    Configuration::from_1d(&ev.iter().map(|&l| edge_scale(n, l)).collect::<Vec<_>>())
}

/// Only the particles with x >= x_min of one soft-edge draw. Uses bisection,
/// so the cost is proportional to N times the number of returned particles.
pub fn sample_airy_edge_window<R: Rng + ?Sized>(
    n: usize,
    beta: f64,
    x_min: f64,
    rng: &mut R,
) -> Result<Configuration> {
    check_beta(beta)?;
    if n == 0 {
        return Err(Error::invalid("n", "at least one particle is required"));
    }
    let (d, e) = tridiagonal_model(n, beta, rng);
    let ev = eigenvalues_above(&d, &e, edge_unscale(n, x_min));
    Configuration::from_1d(&ev.iter().map(|&l| edge_scale(n, l)).collect::<Vec<_>>())
}

/// Unscaled eigenvalues of the dense GOE / GUE / GSE with the same weight
/// exp(-beta/4 sum l^2) as the tridiagonal model.
pub fn gbe_eigenvalues_dense<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> Result<Vec<f64>> {
    use_sequential_linalg();
    let mut normal = |sd: f64| sd * rng.sample::<f64, _>(StandardNormal);
    let eig_err = |e: faer::linalg::evd::EvdError| Error::Eigen(format!("{e:?}"));
    if beta == 1.0 {
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = normal(2f64.sqrt());
            for j in 0..i {
                let v = normal(1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m.self_adjoint_eigenvalues(Side::Lower).map_err(eig_err)
    } else if beta == 2.0 {
        let mut m = Mat::<c64>::zeros(n, n);
        let h = 0.5f64.sqrt();
        for i in 0..n {
            m[(i, i)] = c64::new(normal(1.0), 0.0);
            for j in 0..i {
                let v = c64::new(normal(h), normal(h));
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m.self_adjoint_eigenvalues(Side::Lower).map_err(eig_err)
    } else if beta == 4.0 {
        // [[A, B], [-conj(B), conj(A)]], A Hermitian, B antisymmetric
        let mut m = Mat::<c64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            let a = normal(0.5f64.sqrt());
            m[(i, i)] = c64::new(a, 0.0);
            m[(i + n, i + n)] = c64::new(a, 0.0);
            for j in 0..i {
                let a = c64::new(normal(0.5), normal(0.5));
                let b = c64::new(normal(0.5), normal(0.5));
                m[(i, j)] = a;
                m[(j, i)] = a.conj();
                m[(i + n, j + n)] = a.conj();
                m[(j + n, i + n)] = a;
                m[(i, j + n)] = b;
                m[(j, i + n)] = -b;
                m[(i + n, j)] = -b.conj();
                m[(j + n, i)] = b.conj();
            }
        }
        let ev = m.self_adjoint_eigenvalues(Side::Lower).map_err(eig_err)?;
        Ok(ev.into_iter().step_by(2).collect())
    } else {
        Err(Error::invalid("beta", "dense models exist only for beta in {1, 2, 4}"))
    }
}

/// Soft-edge draw from the dense model; beta in {1, 2, 4}.
pub fn sample_airy_dense<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> Result<Configuration> {
    let ev = gbe_eigenvalues_dense(n, beta, rng)?;
    Configuration::from_1d(&ev.iter().map(|&l| edge_scale(n, l)).collect::<Vec<_>>())
}

/// Eigenvalues of an N x N matrix of iid complex Gaussians with E|z|^2 = 1;
/// their joint density is prop. to prod |z_i - z_j|^2 exp(-sum |z_k|^2).
pub fn sample_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one particle is required"));
    }
    use_sequential_linalg();
    let h = 0.5f64.sqrt();
    let m = Mat::<c64>::from_fn(n, n, |_, _| {
        c64::new(
            h * rng.sample::<f64, _>(StandardNormal),
            h * rng.sample::<f64, _>(StandardNormal),
        )
    });
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let coords: Vec<f64> = ev.iter().flat_map(|z| [z.re, z.im]).collect();
    Configuration::new(2, coords)
}
