use std::f64::consts::PI;

use num_complex::Complex64;

use super::det::det;
use crate::domain::Configuration;
use crate::error::{Error, Result};

/// Ginibre kernel with respect to Lebesgue measure:
/// pi^{-1} exp(-|z|^2/2 - |w|^2/2 + z conj(w)).
pub fn ginibre_kernel(z: [f64; 2], w: [f64; 2]) -> Complex64 {
    let z = Complex64::new(z[0], z[1]);
    let w = Complex64::new(w[0], w[1]);
    let e = z * w.conj() - 0.5 * (z.norm_sqr() + w.norm_sqr());
    e.exp() / PI
}

/// m-point correlation function of the infinite Ginibre process.
pub fn ginibre_correlation(points: &Configuration) -> Result<f64> {
    if points.dim() != 2 {
        return Err(Error::invalid("points", "Ginibre points are two-dimensional"));
    }
    let n = points.len();
    if n == 0 {
        return Ok(1.0);
    }
    let mut m = Vec::with_capacity(n * n);
    for zi in points.points() {
        for wj in points.points() {
            m.push(ginibre_kernel([zi[0], zi[1]], [wj[0], wj[1]]));
        }
    }
    Ok(det(m, n).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pts: &[[f64; 2]]) -> Configuration {
        Configuration::from_points(2, pts).unwrap()
    }

    #[test]
    fn one_point_density_is_flat() {
        for p in [[0.0, 0.0], [3.0, -4.0], [0.1, 7.5]] {
            let r = ginibre_correlation(&cfg(&[p])).unwrap();
            assert!((r - 1.0 / PI).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_function_closed_form() {
        let x = [0.3, -0.2];
        assert!(ginibre_correlation(&cfg(&[x, x])).unwrap().abs() < 1e-15);
        for y in [[0.5, 0.1], [1.3, 2.0], [-0.7, 0.0]] {
            let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
            let want = (1.0 - (-d2).exp()) / (PI * PI);
            let got = ginibre_correlation(&cfg(&[x, y])).unwrap();
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_is_hermitian() {
        let (z, w) = ([0.4, 1.1], [-2.0, 0.3]);
        assert!((ginibre_kernel(z, w) - ginibre_kernel(w, z).conj()).norm() < 1e-16);
    }
}
