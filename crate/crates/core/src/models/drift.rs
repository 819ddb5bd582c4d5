use crate::domain::{Family, FreePotential, LabeledState, ModelSpec};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Pair distances below this are treated as collisions.
pub const MIN_DISTANCE: f64 = 1e-12;

/// Per-model constants hoisted out of the O(N^2) loops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FamilyParams {
    pub family: Family,
    pub dim: usize,
    pub n: f64,
    pub beta: f64,
    pub alpha: f64,
    pub n_cbrt: f64,
    pub riesz_a: i32,
    pub free: FreePotential,
    pub n_particles: usize,
}

impl FamilyParams {
    pub fn new(spec: &ModelSpec) -> Self {
        let n = spec.n_particles as f64;
        FamilyParams {
            family: spec.family,
            dim: spec.dimension(),
            n,
            beta: spec.beta,
            alpha: spec.alpha.unwrap_or(0.0),
            n_cbrt: n.cbrt(),
            riesz_a: spec.riesz_a.unwrap_or(0) as i32,
            free: spec.free_or_default(),
            n_particles: spec.n_particles,
        }
    }

    /// |r|^(a+2) from |r|^2.
    #[inline]
    pub fn riesz_denominator(&self, d2: f64) -> f64 {
        let p = self.riesz_a + 2;
        if p % 2 == 0 {
            d2.powi(p / 2)
        } else {
            d2.sqrt().powi(p)
        }
    }
}

#[inline]
fn check_pair(i: usize, j: usize, d2: f64) -> Result<()> {
    if d2 < MIN_DISTANCE * MIN_DISTANCE {
        Err(Error::SingularConfiguration {
            i,
            j,
            distance: d2.sqrt(),
        })
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn check_domain(p: &FamilyParams, index: usize, x0: f64) -> Result<()> {
    if p.family.is_bessel() && !(x0 > 0.0) {
        Err(Error::Domain { index, value: x0 })
    } else {
        Ok(())
    }
}

/// Drift of particle `i`; writes `out` (length d) and returns the distance
/// to the nearest other particle.
pub(crate) fn particle_drift(
    p: &FamilyParams,
    coords: &[f64],
    i: usize,
    out: &mut [f64],
) -> Result<f64> {
    let d = p.dim;
    let n = coords.len() / d;
    let xi = &coords[i * d..(i + 1) * d];
    check_domain(p, i, xi[0])?;
    let mut acc = [CompensatedSum::new(); 3];
    let mut min_d2 = f64::INFINITY;
    let mut r = [0.0f64; 3];
    for j in (0..n).filter(|&j| j != i) {
        let xj = &coords[j * d..(j + 1) * d];
        let mut d2 = 0.0;
        for k in 0..d {
            r[k] = xi[k] - xj[k];
            d2 += r[k] * r[k];
        }
        check_pair(i, j, d2)?;
        min_d2 = min_d2.min(d2);
        match p.family {
            Family::AiryBeta | Family::Bessel2Alpha => acc[0].add(1.0 / r[0]),
            Family::SquareBessel => acc[0].add(xi[0] / r[0]),
            Family::SqrtSquareBessel => {
                acc[0].add(2.0 * xi[0] / (xi[0] * xi[0] - xj[0] * xj[0]))
            }
            Family::Ginibre => {
                for k in 0..d {
                    acc[k].add(r[k] / d2);
                }
            }
            Family::LennardJones612 => {
                let (d8, d14) = (d2.powi(4), d2.powi(7));
                for k in 0..d {
                    acc[k].add(12.0 * r[k] / d14 - 6.0 * r[k] / d8);
                }
            }
            Family::Riesz => {
                let den = p.riesz_denominator(d2);
                for k in 0..d {
                    acc[k].add(r[k] / den);
                }
            }
        }
    }
    let half_beta = 0.5 * p.beta;
    match p.family {
        Family::AiryBeta => {
            out[0] = half_beta * acc[0].value()
                - half_beta * (p.n_cbrt + xi[0] / (2.0 * p.n_cbrt));
        }
        Family::Ginibre => {
            for k in 0..d {
                out[k] = -xi[k] + acc[k].value();
            }
        }
        Family::Bessel2Alpha => {
            out[0] = -1.0 / (8.0 * p.n) + p.alpha / (2.0 * xi[0]) + acc[0].value();
        }
        Family::SquareBessel => {
            out[0] = 4.0 * (-xi[0] / (8.0 * p.n) + 0.5 * (p.alpha + 1.0) + acc[0].value());
        }
        Family::SqrtSquareBessel => {
            out[0] = -xi[0] / (4.0 * p.n) + (p.alpha + 0.5) / xi[0] + acc[0].value();
        }
        Family::LennardJones612 | Family::Riesz => {
            for k in 0..d {
                out[k] = -half_beta * p.free.gradient(xi[k], p.n_particles)
                    + half_beta * acc[k].value();
            }
        }
    }
    Ok(min_d2.sqrt())
}

fn check_state(spec: &ModelSpec, dim: usize) -> Result<()> {
    spec.validate()?;
    if dim != spec.dimension() {
        return Err(Error::invalid(
            "state",
            format!("dimension {dim} does not match model dimension {}", spec.dimension()),
        ));
    }
    Ok(())
}

/// Drift b^N of particle `i` of the finite-N SDE.
pub fn drift_finite(spec: &ModelSpec, i: usize, state: &LabeledState) -> Result<Vec<f64>> {
    check_state(spec, state.dim())?;
    if i >= state.len() {
        return Err(Error::invalid("i", format!("particle index {i} out of range")));
    }
    let p = FamilyParams::new(spec);
    let mut out = vec![0.0; state.dim()];
    particle_drift(&p, state.coords(), i, &mut out)?;
    Ok(out)
}

/// Drift of every particle, point-major into `out`.
pub fn drift_all(spec: &ModelSpec, coords: &[f64], out: &mut [f64]) -> Result<()> {
    let mut gaps = vec![0.0; coords.len() / spec.dimension()];
    drift_and_gaps(spec, coords, out, &mut gaps)
}

/// Drift of every particle plus each particle's nearest-obstacle distance.
pub fn drift_and_gaps(
    spec: &ModelSpec,
    coords: &[f64],
    out: &mut [f64],
    gaps: &mut [f64],
) -> Result<()> {
    let p = FamilyParams::new(spec);
    drift_and_gaps_with(&p, coords, out, gaps)?;
    if p.family.is_bessel() {
        for (g, x) in gaps.iter_mut().zip(coords) {
            *g = g.min(*x);
        }
    }
    Ok(())
}

/// As `drift_and_gaps` but the gaps count other particles only.
pub(crate) fn drift_and_gaps_with(
    p: &FamilyParams,
    coords: &[f64],
    out: &mut [f64],
    gaps: &mut [f64],
) -> Result<()> {
    let d = p.dim;
    for (i, gap) in gaps.iter_mut().enumerate() {
        *gap = particle_drift(p, coords, i, &mut out[i * d..(i + 1) * d])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LabelScheme;

    fn state(dim: usize, coords: &[f64]) -> LabeledState {
        let scheme = if dim == 1 {
            LabelScheme::AscendingValue
        } else {
            LabelScheme::AscendingModulus
        };
        LabeledState::from_ordered(dim, coords.to_vec(), scheme).unwrap()
    }

    #[test]
    fn airy_single_particle() {
        let b = drift_finite(&ModelSpec::airy(1, 2.0), 0, &state(1, &[0.0])).unwrap();
        assert_eq!(b, vec![-1.0]);
    }

    #[test]
    fn ginibre_two_particles() {
        let s = state(2, &[0.0, 0.0, 1.0, 0.0]);
        let b = drift_finite(&ModelSpec::ginibre(2), 0, &s).unwrap();
        assert_eq!(b, vec![-1.0, 0.0]);
    }

    #[test]
    fn bessel_two_particles() {
        let b = drift_finite(&ModelSpec::bessel(2, 1.0), 0, &state(1, &[1.0, 2.0])).unwrap();
        assert!((b[0] + 0.5625).abs() < 1e-15);
    }

    #[test]
    fn square_bessel_and_sqrt_formulas() {
        // 4{-1/16 + 1 + 1/(1-2)} and -1/8 + 1.5 + 2/(1-4)
        let sq = drift_finite(&ModelSpec::square_bessel(2, 1.0), 0, &state(1, &[1.0, 2.0])).unwrap();
        assert!((sq[0] - 4.0 * (-1.0 / 16.0 + 1.0 - 1.0)).abs() < 1e-14);
        let rt = drift_finite(&ModelSpec::sqrt_square_bessel(2, 1.0), 0, &state(1, &[1.0, 2.0])).unwrap();
        assert!((rt[0] - (-1.0 / 8.0 + 1.5 - 2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn lennard_jones_force_at_unit_distance() {
        let free = FreePotential { coeff: 0.0, exponent: 0.0 };
        let spec = ModelSpec::lennard_jones(2, 2.0, free);
        let s = state(3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // (beta/2)(12 - 6) along +x
        let b = drift_finite(&spec, 0, &s).unwrap();
        assert!((b[0] - 6.0).abs() < 1e-14 && b[1] == 0.0 && b[2] == 0.0);
    }

    #[test]
    fn riesz_force_and_free_potential() {
        let free = FreePotential { coeff: 1.0, exponent: 0.0 };
        let spec = ModelSpec::riesz(2, 2.0, 4, free);
        let s = state(3, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // -(1)(2*2) + 2/2^6
        let b = drift_finite(&spec, 0, &s).unwrap();
        assert!((b[0] - (-4.0 + 2.0 / 64.0)).abs() < 1e-14);
        let spec5 = ModelSpec::riesz(2, 2.0, 5, FreePotential { coeff: 0.0, exponent: 0.0 });
        let b5 = drift_finite(&spec5, 0, &s).unwrap();
        assert!((b5[0] - 2.0 / 2f64.powi(7)).abs() < 1e-15);
    }

    #[test]
    fn coincident_particles_are_singular() {
        let err = drift_finite(&ModelSpec::airy(2, 2.0), 0, &state(1, &[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::SingularConfiguration { i: 0, j: 1, .. }));
    }

    #[test]
    fn nonpositive_bessel_coordinate_is_domain_error() {
        let err = drift_finite(&ModelSpec::bessel(2, 1.0), 0, &state(1, &[-0.5, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Domain { index: 0, .. }));
    }

    #[test]
    fn interaction_part_sums_to_zero_for_two_particles() {
        // Ginibre: drift = -x + interaction; the interaction parts cancel.
        let coords = [0.3, -1.2, 2.0, 0.7];
        let mut out = [0.0; 4];
        drift_all(&ModelSpec::ginibre(2), &coords, &mut out).unwrap();
        assert!((out[0] + coords[0] + out[2] + coords[2]).abs() < 1e-14);
        assert!((out[1] + coords[1] + out[3] + coords[3]).abs() < 1e-14);
    }

    #[test]
    fn gaps_include_the_hard_wall() {
        let mut out = [0.0; 2];
        let mut gaps = [0.0; 2];
        drift_and_gaps(&ModelSpec::bessel(2, 1.0), &[0.25, 3.0], &mut out, &mut gaps).unwrap();
        assert_eq!(gaps, [0.25, 2.75]);
    }
}
