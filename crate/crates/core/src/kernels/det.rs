use num_complex::ComplexFloat;

/// Determinant of a row-major n x n matrix by LU with partial pivoting.
pub(crate) fn det<T>(mut a: Vec<T>, n: usize) -> T
where
    T: ComplexFloat<Real = f64>,
{
    debug_assert_eq!(a.len(), n * n);
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        let p = a[pivot * n + col];
        if p.abs() == 0.0 {
            return T::zero();
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det = det * p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f.abs() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn small_real_determinants() {
        assert_eq!(det(vec![3.0], 1), 3.0);
        assert!((det(vec![1.0, 2.0, 3.0, 4.0], 2) + 2.0).abs() < 1e-15);
        let m = vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!((det(m, 3) + 1.0).abs() < 1e-15);
        assert_eq!(det(vec![1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn complex_determinant() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let d = det(vec![one, i, -i, one], 2);
        assert!((d - Complex64::new(0.0, 0.0)).norm() < 1e-15);
        let d = det(vec![2.0 * one, i, -i, one], 2);
        assert!((d - one).norm() < 1e-15);
    }
}
