use statrs::function::gamma::gamma;

use super::ddouble::DD;
use crate::error::{Error, Result};

/// Largest kernel argument; Bessel functions are evaluated up to sqrt of it.
pub const BESSEL_X_MAX: f64 = 400.0;
const DIAG_DELTA: f64 = 1e-4;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("alpha", "must be a finite real >= 1"))
    }
}

fn check_arg(what: &'static str, v: f64, min: f64, max: f64) -> Result<()> {
    if v >= min && v <= max {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: v,
            min,
            max,
        })
    }
}

/// J_nu(z) and J_nu'(z) from the ascending series; nu >= 0, z > 0.
fn series(nu: f64, z: f64) -> (f64, f64) {
    let lead = (0.5 * z).powf(nu) / gamma(nu + 1.0);
    let q = DD::from_f64(-0.25 * z * z);
    let mut term = DD::from_f64(1.0);
    let mut sum = term;
    let mut dsum = DD::from_f64(nu);
    for k in 0..500 {
        let kf = k as f64;
        term = (term * q).div_f64((kf + 1.0) * (kf + nu + 1.0));
        sum = sum + term;
        dsum = dsum + term.mul_f64(2.0 * (kf + 1.0) + nu);
        if kf > 0.5 * z && term.abs() < 1e-34 * (sum.abs() + 1.0) {
            break;
        }
    }
    (lead * sum.to_f64(), lead * dsum.to_f64() / z)
}

/// Bessel function of the first kind J_nu(z), nu >= 0, 0 <= z <= sqrt(X_max).
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid("nu", "order must be a finite real >= 0"));
    }
    check_arg("bessel argument", z, 0.0, BESSEL_X_MAX.sqrt())?;
    if z == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(series(nu, z).0)
}

/// J_nu'(z), summed term by term.
pub fn bessel_j_prime(nu: f64, z: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid("nu", "order must be a finite real >= 0"));
    }
    check_arg("bessel argument", z, f64::MIN_POSITIVE, BESSEL_X_MAX.sqrt())?;
    Ok(series(nu, z).1)
}

#[derive(Clone, Copy)]
enum Form {
    Recurrence,
    Derivative,
}

fn kernel_off(alpha: f64, x: f64, y: f64, form: Form) -> f64 {
    let (sx, sy) = (x.sqrt(), y.sqrt());
    let (jx, jpx) = series(alpha, sx);
    let (jy, jpy) = series(alpha, sy);
    match form {
        Form::Recurrence => {
            let j1x = series(alpha + 1.0, sx).0;
            let j1y = series(alpha + 1.0, sy).0;
            (sx * j1x * jy - jx * sy * j1y) / (2.0 * (x - y))
        }
        Form::Derivative => (jx * sy * jpy - sx * jpx * jy) / (2.0 * (x - y)),
    }
}

fn kernel_diag(alpha: f64, x: f64, form: Form) -> f64 {
    let u = x.sqrt();
    match form {
        Form::Recurrence => {
            let j = series(alpha, u).0;
            let jp1 = series(alpha + 1.0, u).0;
            let jm1 = series(alpha - 1.0, u).0;
            0.25 * (j * j - jp1 * jm1)
        }
        Form::Derivative => {
            let (j, jp) = series(alpha, u);
            0.25 * (jp * jp + (1.0 - alpha * alpha / (u * u)) * j * j)
        }
    }
}

fn kernel(alpha: f64, x: f64, y: f64, form: Form) -> f64 {
    if (x - y).abs() > DIAG_DELTA {
        return kernel_off(alpha, x, y, form);
    }
    // K(m + d, m - d) is even in d: fit K0 + c d^2 through an off-diagonal point.
    let m = 0.5 * (x + y);
    let d = 0.5 * (x - y);
    let k0 = kernel_diag(alpha, m, form);
    if d == 0.0 {
        return k0;
    }
    let d0 = (1e-3f64).min(0.5 * m);
    let k1 = kernel_off(alpha, m + d0, m - d0, form);
    k0 + (k1 - k0) * (d / d0) * (d / d0)
}

fn check_kernel_args(alpha: f64, x: f64, y: f64) -> Result<()> {
    check_alpha(alpha)?;
    check_arg("bessel kernel x", x, f64::MIN_POSITIVE, BESSEL_X_MAX)?;
    check_arg("bessel kernel y", y, f64::MIN_POSITIVE, BESSEL_X_MAX)
}

/// Hard-edge Bessel kernel on (0, X_max], in the J_{alpha+1} form.
pub fn bessel_kernel(alpha: f64, x: f64, y: f64) -> Result<f64> {
    check_kernel_args(alpha, x, y)?;
    Ok(kernel(alpha, x, y, Form::Recurrence))
}

/// The same kernel written with J_alpha'.
pub fn bessel_kernel_derivative_form(alpha: f64, x: f64, y: f64) -> Result<f64> {
    check_kernel_args(alpha, x, y)?;
    Ok(kernel(alpha, x, y, Form::Derivative))
}
