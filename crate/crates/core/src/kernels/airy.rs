use std::f64::consts::PI;

use super::ddouble::DD;
use crate::error::{Error, Result};

/// Supported argument range of [`airy_fn`].
pub const AIRY_MIN: f64 = -30.0;
pub const AIRY_MAX: f64 = 10.0;

/// Below this |x| the Maclaurin series (in double-double) is used.
const SERIES_LIMIT: f64 = 8.0;
/// Below this |x - y| the kernel switches to its diagonal expansion.
pub const AIRY_DIAG_DELTA: f64 = 1e-4;

/// Ai(0) and -Ai'(0) to double-double precision.
const C1: DD = DD::new(0.3550280538878172, 2.05233632436212e-17);
const C2: DD = DD::new(0.2588194037928068, -2.522243111610832e-17);

fn check_range(x: f64) -> Result<()> {
    if (AIRY_MIN..=AIRY_MAX).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "airy argument",
            value: x,
            min: AIRY_MIN,
            max: AIRY_MAX,
        })
    }
}

/// (Ai(x), Ai'(x)) for x in [-30, 10].
pub fn airy_fn(x: f64) -> Result<(f64, f64)> {
    check_range(x)?;
    Ok(airy_unchecked(x))
}

pub(crate) fn airy_unchecked(x: f64) -> (f64, f64) {
    if x.abs() <= SERIES_LIMIT {
        airy_series(x)
    } else {
        airy_asymptotic(x)
    }
}

/// Ai = c1 f - c2 g with f, g the two canonical solutions of y'' = xy.
pub(crate) fn airy_series(x: f64) -> (f64, f64) {
    let xd = DD::from_f64(x);
    let x3 = xd * xd * xd;
    let mut t = DD::from_f64(1.0);
    let mut s = xd;
    let mut u = (xd * xd).div_f64(2.0);
    let mut v = DD::from_f64(1.0);
    let (mut f, mut g) = (t, s);
    let (mut fp, mut gp) = (u, v);
    for k in 0..300 {
        let k3 = 3.0 * k as f64;
        t = (t * x3).div_f64((k3 + 2.0) * (k3 + 3.0));
        s = (s * x3).div_f64((k3 + 3.0) * (k3 + 4.0));
        if k > 0 {
            u = (u * x3).div_f64(k3 * (k3 + 2.0));
            fp = fp + u;
        }
        v = (v * x3).div_f64((k3 + 1.0) * (k3 + 3.0));
        f = f + t;
        g = g + s;
        gp = gp + v;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if k > 2 && t.abs().max(s.abs()).max(u.abs()).max(v.abs()) < 1e-34 * scale {
            break;
        }
    }
    let ai = C1 * f - C2 * g;
    let aip = C1 * fp - C2 * gp;
    (ai.to_f64(), aip.to_f64())
}

/// Large-|x| expansions, summed up to the smallest term.
pub(crate) fn airy_asymptotic(x: f64) -> (f64, f64) {
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let z14 = z.sqrt().sqrt();
    // u_k / zeta^k and v_k / zeta^k
    let mut uk: f64 = 1.0;
    let mut terms_u: Vec<f64> = vec![1.0];
    let mut terms_v = vec![1.0];
    for k in 1..60 {
        let kf = k as f64;
        uk *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf)
            / zeta;
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        if uk.abs() > terms_u[k - 1].abs() || uk.abs() < 1e-18 {
            break;
        }
        terms_u.push(uk);
        terms_v.push(vk);
    }
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    if x > 0.0 {
        let su: f64 = terms_u.iter().enumerate().map(|(k, t)| sign(k) * t).sum();
        let sv: f64 = terms_v.iter().enumerate().map(|(k, t)| sign(k) * t).sum();
        let e = (-zeta).exp() / (2.0 * PI.sqrt());
        (e / z14 * su, -e * z14 * sv)
    } else {
        let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
        for (k, (tu, tv)) in terms_u.iter().zip(&terms_v).enumerate() {
            let sgn = sign(k / 2);
            if k % 2 == 0 {
                ue += sgn * tu;
                ve += sgn * tv;
            } else {
                uo += sgn * tu;
                vo += sgn * tv;
            }
        }
        let phase = zeta - PI / 4.0;
        let (sn, cs) = phase.sin_cos();
        let ai = (cs * ue + sn * uo) / (PI.sqrt() * z14);
        let aip = z14 / PI.sqrt() * (sn * ve - cs * vo);
        (ai, aip)
    }
}

/// Airy kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y).
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    check_range(x)?;
    check_range(y)?;
    Ok(airy_kernel_unchecked(x, y))
}

pub(crate) fn airy_kernel_unchecked(x: f64, y: f64) -> f64 {
    if (x - y).abs() <= AIRY_DIAG_DELTA {
        let m = 0.5 * (x + y);
        let d = 0.5 * (x - y);
        let (a, ap) = airy_unchecked(m);
        let k0 = ap * ap - m * a * a;
        k0 + d * d * (2.0 * m * ap * ap - 2.0 * m * m * a * a + a * ap) / 3.0
    } else {
        let (ax, apx) = airy_unchecked(x);
        let (ay, apy) = airy_unchecked(y);
        (ax * apy - apx * ay) / (x - y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from DLMF-grade tables.
    const TABLE: [(f64, f64, f64); 9] = [
        (-30.0, -0.087968188456842162833, 1.2286206026374851347),
        (-20.0, -0.17640612707798468959, 0.8928628567364712384),
        (-10.0, 0.040241238486443190689, 0.9962650441327900559),
        (-8.5, -0.33029023763020887902, -0.032313348284639135873),
        (-2.3, 0.026706333057356970013, 0.70003366287657599145),
        (1.0, 0.13529241631288141552, -0.15914744129679321279),
        (5.0, 0.00010834442813607441735, -0.000247413890868462476),
        (8.5, 1.0997009755195506509e-8, -3.2377254404476022559e-8),
        (10.0, 1.1047532552898685934e-10, -3.5206336767389236366e-10),
    ];

    #[test]
    fn values_at_zero() {
        let (a, ap) = airy_fn(0.0).unwrap();
        assert!((a - 0.3550280539).abs() < 1e-10);
        assert!((ap + 0.2588194038).abs() < 1e-10);
    }

    #[test]
    fn matches_reference_table() {
        for (x, a, ap) in TABLE {
            let (ga, gap) = airy_fn(x).unwrap();
            let scale = a.abs().max(ap.abs());
            assert!((ga - a).abs() < 1e-12 * scale.max(1e-3), "Ai({x}) = {ga}, want {a}");
            assert!((gap - ap).abs() < 1e-12 * scale.max(1e-3), "Ai'({x}) = {gap}, want {ap}");
        }
    }

    #[test]
    fn series_and_asymptotic_agree_in_the_overlap() {
        for x in [-10.0, -9.0, -8.0, 8.0, 9.0, 10.0] {
            let (a1, p1) = airy_series(x);
            let (a2, p2) = airy_asymptotic(x);
            let scale = a1.abs().max(p1.abs());
            assert!((a1 - a2).abs() < 1e-11 * scale, "Ai at {x}");
            assert!((p1 - p2).abs() < 1e-11 * scale, "Ai' at {x}");
        }
    }

    #[test]
    fn decays_log_concavely_past_one() {
        let mut prev = airy_fn(1.0).unwrap().0.ln();
        let mut prev_step = f64::NEG_INFINITY;
        for k in 1..=90 {
            let x = 1.0 + 0.1 * k as f64;
            let l = airy_fn(x).unwrap().0.ln();
            let step = l - prev;
            assert!(step < 0.0);
            assert!(step <= prev_step + 1e-12 || k == 1);
            prev_step = step;
            prev = l;
        }
    }

    #[test]
    fn range_is_enforced() {
        assert!(airy_fn(10.5).is_err());
        assert!(airy_fn(-31.0).is_err());
        assert!(airy_fn(f64::NAN).is_err());
    }

    #[test]
    fn kernel_diagonal_and_symmetry() {
        let k00 = airy_kernel(0.0, 0.0).unwrap();
        assert!((k00 - 0.066987483779663974).abs() < 1e-15);
        let near = airy_kernel(0.0, 1e-4).unwrap();
        assert!((near - k00).abs() < 1e-5);
        for (x, y) in [(-3.0, 1.7), (0.2, -12.5), (4.0, 4.5)] {
            assert_eq!(airy_kernel(x, y).unwrap(), airy_kernel(y, x).unwrap());
        }
        // just inside the switch the expansion agrees with the quotient
        for m in [-25.0, -5.0, 0.5, 6.0] {
            let (x, y) = (m, m + 0.9999e-4);
            let (ax, px) = airy_unchecked(x);
            let (ay, py) = airy_unchecked(y);
            let quotient = (ax * py - px * ay) / (x - y);
            assert!((airy_kernel(x, y).unwrap() - quotient).abs() < 1e-9, "at {m}");
        }
    }
}
