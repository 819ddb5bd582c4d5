//! Eigenvalues of real symmetric tridiagonal matrices: implicit QL for the
//! full spectrum, Sturm-sequence bisection for the top of it.

use crate::error::{Error, Result};

/// All eigenvalues, ascending. `off[i]` couples `diag[i]` and `diag[i + 1]`.
pub fn tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(off.len() + 1 == n || (n == 0 && off.is_empty()));
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Eigen(format!("QL did not converge at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Number of eigenvalues strictly below `x` (Sturm count on the LDL^T pivots).
pub fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off_sq[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues greater than or equal to `threshold`, ascending, by bisection.
pub fn eigenvalues_above(diag: &[f64], off: &[f64], threshold: f64) -> Vec<f64> {
    let n = diag.len();
    let off_sq: Vec<f64> = off.iter().map(|v| v * v).collect();
    let below = sturm_count(diag, &off_sq, threshold);
    let mut upper = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        upper = upper.max(diag[i] + left + right);
    }
    let mut out = Vec::with_capacity(n - below);
    for idx in below..n {
        let (mut lo, mut hi) = (out.last().copied().unwrap_or(threshold), upper + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(diag, &off_sq, mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian_spectrum() {
        // tridiag(1, 2, 1): eigenvalues 2 + 2 cos(k pi / (n + 1))
        let n = 40;
        let d = vec![2.0; n];
        let e = vec![1.0; n - 1];
        let got = tridiag_eigenvalues(&d, &e).unwrap();
        let mut want: Vec<f64> = (1..=n)
            .map(|k| 2.0 + 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13);
        }
        let top = eigenvalues_above(&d, &e, 3.5);
        let expect: Vec<f64> = want.iter().copied().filter(|&v| v >= 3.5).collect();
        assert_eq!(top.len(), expect.len());
        for (g, w) in top.iter().zip(&expect) {
            assert!((g - w).abs() < 1e-13);
        }
    }

    #[test]
    fn trivial_sizes() {
        assert_eq!(tridiag_eigenvalues(&[3.0], &[]).unwrap(), vec![3.0]);
        let ev = tridiag_eigenvalues(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert!(eigenvalues_above(&[0.0, 0.0], &[1.0], 2.0).is_empty());
    }

    #[test]
    fn sturm_counts_match_ql() {
        let d = [0.3, -1.2, 2.5, 0.0, 1.1, -0.7];
        let e = [0.5, 1.4, -0.2, 0.9, 0.05];
        let ev = tridiag_eigenvalues(&d, &e).unwrap();
        let e2: Vec<f64> = e.iter().map(|v| v * v).collect();
        for x in [-3.0, -1.0, 0.0, 0.5, 1.7, 4.0] {
            let want = ev.iter().filter(|&&v| v < x).count();
            assert_eq!(sturm_count(&d, &e2, x), want);
        }
        let top = eigenvalues_above(&d, &e, -10.0);
        for (a, b) in top.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
