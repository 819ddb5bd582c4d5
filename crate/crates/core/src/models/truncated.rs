use crate::domain::{Configuration, Family, LabeledState, ModelSpec};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

use super::drift::{check_domain, FamilyParams, MIN_DISTANCE};
use super::{GinibreVariant, TruncationParams};

/// `int_{|x|<r} rho(x) / (-x) dx` for rho(x) = sqrt(-x) on x < 0, i.e. 2 sqrt(r).
pub fn airy_tail_integral(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::OutOfRange {
            what: "airy_tail_integral",
            value: r,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(2.0 * r.sqrt())
}

/// Truncated limit drift of particle `i`, the other particles of `state`
/// forming the environment.
pub fn drift_limit_truncated(
    spec: &ModelSpec,
    i: usize,
    state: &LabeledState,
    trunc: &TruncationParams,
) -> Result<Vec<f64>> {
    spec.validate()?;
    trunc.validate(spec.family)?;
    if state.dim() != spec.dimension() || i >= state.len() {
        return Err(Error::invalid("state", "dimension mismatch or index out of range"));
    }
    let p = FamilyParams::new(spec);
    let mut out = vec![0.0; state.dim()];
    limit_drift(&p, state.position(i), state.coords(), Some(i), trunc, &mut out)?;
    Ok(out)
}

/// Truncated limit drift at a test position `x` against an environment
/// configuration that does not contain `x`.
pub fn drift_limit_at(
    spec: &ModelSpec,
    x: &[f64],
    env: &Configuration,
    trunc: &TruncationParams,
) -> Result<Vec<f64>> {
    spec.validate()?;
    trunc.validate(spec.family)?;
    if x.len() != spec.dimension() || (env.dim() != spec.dimension() && !env.is_empty()) {
        return Err(Error::invalid("x", "dimension mismatch"));
    }
    let p = FamilyParams::new(spec);
    let mut out = vec![0.0; x.len()];
    limit_drift(&p, x, env.coords(), None, trunc, &mut out)?;
    Ok(out)
}

pub(crate) fn limit_drift(
    p: &FamilyParams,
    x: &[f64],
    env: &[f64],
    skip: Option<usize>,
    trunc: &TruncationParams,
    out: &mut [f64],
) -> Result<()> {
    let d = p.dim;
    match skip {
        Some(i) => check_domain(p, i, x[0])?,
        None => check_domain(p, 0, x[0])
            .map_err(|_| Error::invalid("x", "test position must lie in (0, inf)"))?,
    }
    let r2 = trunc.r * trunc.r;
    let origin_window = matches!(trunc.variant, Some(GinibreVariant::Origin));
    let mut acc = [CompensatedSum::new(); 3];
    let mut diff = [0.0f64; 3];
    for (j, y) in env.chunks_exact(d).enumerate() {
        if Some(j) == skip {
            continue;
        }
        let mut d2 = 0.0;
        let mut y2 = 0.0;
        for k in 0..d {
            diff[k] = x[k] - y[k];
            d2 += diff[k] * diff[k];
            y2 += y[k] * y[k];
        }
        if d2 < MIN_DISTANCE * MIN_DISTANCE {
            let distance = d2.sqrt();
            return Err(match skip {
                Some(i) => Error::SingularConfiguration { i, j, distance },
                None => Error::TestPointCollision { j, distance },
            });
        }
        let inside = match p.family {
            Family::Ginibre if !origin_window => d2 < r2,
            Family::LennardJones612 | Family::Riesz => d2 < r2,
            _ => y2 < r2,
        };
        if !inside {
            continue;
        }
        match p.family {
            Family::AiryBeta | Family::Bessel2Alpha => acc[0].add(1.0 / diff[0]),
            Family::SquareBessel => acc[0].add(x[0] / diff[0]),
            Family::SqrtSquareBessel => acc[0].add(2.0 * x[0] / (x[0] * x[0] - y[0] * y[0])),
            Family::Ginibre => {
                for k in 0..d {
                    acc[k].add(diff[k] / d2);
                }
            }
            Family::LennardJones612 => {
                let (d8, d14) = (d2.powi(4), d2.powi(7));
                for k in 0..d {
                    acc[k].add(12.0 * diff[k] / d14 - 6.0 * diff[k] / d8);
                }
            }
            Family::Riesz => {
                let den = p.riesz_denominator(d2);
                for k in 0..d {
                    acc[k].add(diff[k] / den);
                }
            }
        }
    }
    let half_beta = 0.5 * p.beta;
    match p.family {
        Family::AiryBeta => {
            let tail = trunc.edge_density.tail_integral(trunc.r)?;
            out[0] = half_beta * (acc[0].value() - tail);
        }
        Family::Ginibre => {
            for k in 0..d {
                out[k] = acc[k].value() - if origin_window { x[k] } else { 0.0 };
            }
        }
        Family::Bessel2Alpha => out[0] = p.alpha / (2.0 * x[0]) + acc[0].value(),
        Family::SquareBessel => out[0] = 4.0 * (0.5 * (p.alpha + 1.0) + acc[0].value()),
        Family::SqrtSquareBessel => out[0] = (p.alpha + 0.5) / x[0] + acc[0].value(),
        Family::LennardJones612 | Family::Riesz => {
            for k in 0..d {
                out[k] = half_beta * acc[k].value();
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LabelScheme;
    use crate::models::{drift_finite, EdgeDensity};

    #[test]
    fn tail_integral_closed_form() {
        assert_eq!(airy_tail_integral(1.0).unwrap(), 2.0);
        assert_eq!(airy_tail_integral(4.0).unwrap(), 4.0);
        assert_eq!(airy_tail_integral(0.25).unwrap(), 1.0);
        assert!(airy_tail_integral(0.0).is_err());
        assert!(airy_tail_integral(-1.0).is_err());
    }

    #[test]
    fn semicircle_compensator_divides_by_pi() {
        let v = EdgeDensity::Semicircle.tail_integral(4.0).unwrap();
        assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn airy_lone_particle() {
        let s = LabeledState::from_ordered(1, vec![0.0], LabelScheme::AscendingValue).unwrap();
        let b = drift_limit_truncated(&ModelSpec::airy(1, 2.0), 0, &s, &TruncationParams::new(4.0, 1.0))
            .unwrap();
        assert_eq!(b, vec![-4.0]);
    }

    #[test]
    fn ginibre_centered_excludes_far_neighbor() {
        let s = LabeledState::from_ordered(2, vec![0.0, 0.0, 2.0, 0.0], LabelScheme::AscendingModulus)
            .unwrap();
        let t = TruncationParams::ginibre(1.0, 1.0, GinibreVariant::Centered);
        let b = drift_limit_truncated(&ModelSpec::ginibre(2), 0, &s, &t).unwrap();
        assert_eq!(b, vec![0.0, 0.0]);
    }

    #[test]
    fn ginibre_origin_variant_confines() {
        let env = Configuration::empty(2);
        let t = TruncationParams::ginibre(3.0, 1.0, GinibreVariant::Origin);
        let b = drift_limit_at(&ModelSpec::ginibre(5), &[1.5, -0.5], &env, &t).unwrap();
        assert_eq!(b, vec![-1.5, 0.5]);
    }

    #[test]
    fn airy_truncated_minus_finite_identity() {
        // finite - truncated = (beta/2){sum_{|x_j|>=r} 1/(x_i-x_j) - N^{1/3} - x_i/(2N^{1/3}) + 2 sqrt(r)}
        let xs = [-7.5, -3.2, -1.1, 0.4, 1.9, 2.6];
        let spec = ModelSpec::airy(xs.len(), 2.0);
        let s = LabeledState::from_ordered(1, xs.to_vec(), LabelScheme::AscendingValue).unwrap();
        let r = 3.0;
        let t = TruncationParams::new(r, 1.0);
        for i in 0..xs.len() {
            let fin = drift_finite(&spec, i, &s).unwrap()[0];
            let tr = drift_limit_truncated(&spec, i, &s, &t).unwrap()[0];
            let n13 = (xs.len() as f64).cbrt();
            let far: f64 = (0..xs.len())
                .filter(|&j| j != i && xs[j].abs() >= r)
                .map(|j| 1.0 / (xs[i] - xs[j]))
                .sum();
            let expected = far - n13 - xs[i] / (2.0 * n13) + 2.0 * r.sqrt();
            assert!((fin - tr - expected).abs() < 1e-12, "i = {i}");
        }
    }

    #[test]
    fn bessel_limit_window() {
        let env = Configuration::from_1d(&[2.0, 10.0]).unwrap();
        let t = TruncationParams::new(5.0, 1.0);
        let b = drift_limit_at(&ModelSpec::bessel(3, 2.0), &[1.0], &env, &t).unwrap();
        assert!((b[0] - (1.0 - 1.0)).abs() < 1e-15);
        let sq = drift_limit_at(&ModelSpec::square_bessel(3, 1.0), &[1.0], &env, &t).unwrap();
        assert!((sq[0] - 4.0 * (1.0 - 1.0)).abs() < 1e-15);
        let rt = drift_limit_at(&ModelSpec::sqrt_square_bessel(3, 1.0), &[1.0], &env, &t).unwrap();
        assert!((rt[0] - (1.5 + 2.0 / (1.0 - 4.0))).abs() < 1e-15);
    }

    #[test]
    fn test_position_on_environment_point_is_singular() {
        let env = Configuration::from_1d(&[0.5]).unwrap();
        let t = TruncationParams::new(5.0, 1.0);
        assert!(matches!(
            drift_limit_at(&ModelSpec::airy(2, 2.0), &[0.5], &env, &t),
            Err(Error::TestPointCollision { .. })
        ));
    }
}
