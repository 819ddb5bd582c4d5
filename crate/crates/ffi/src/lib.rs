//! C ABI over the `finite-ibm` library.
//!
//! Every entry point returns an [`FibmStatus`]; on failure the message is
//! kept per thread and read with [`fibm_last_error`]. Objects are opaque
//! handles released by their `_free` function. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finite_ibm::kernels::{KernelId, KernelSpec};
use finite_ibm::models::drift_all;
use finite_ibm::sampling::{sample_many, SamplerConfig};
use finite_ibm::sde::{simulate, IntegratorConfig, PathEnsemble};
use finite_ibm::{label, Configuration, Error, Family, ModelSpec};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FibmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Numerical = 3,
    Io = 4,
    OutOfBounds = 5,
    Panic = 6,
}

/// Model description.
pub struct FibmModel {
    spec: ModelSpec,
}

/// Equilibrium samples, one configuration each.
pub struct FibmSamples {
    configs: Vec<Configuration>,
}

/// Recorded SDE paths.
pub struct FibmEnsemble {
    ens: PathEnsemble,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FibmStatus {
    match e {
        Error::Io(_) => FibmStatus::Io,
        e if e.is_numerical() => FibmStatus::Numerical,
        _ => FibmStatus::InvalidParameter,
    }
}

enum Fail {
    Status(FibmStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(FibmStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> FibmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FibmStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            FibmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Fail::Status(FibmStatus::InvalidParameter, format!("{what} is not UTF-8"))
    })
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if len < src.len() {
        return Err(Fail::Status(
            FibmStatus::OutOfBounds,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

fn out_of_bounds(what: &str, index: usize, len: usize) -> Fail {
    Fail::Status(
        FibmStatus::OutOfBounds,
        format!("{what} {index} out of range (have {len})"),
    )
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fibm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Creates a model. `family` is one of airy, ginibre, bessel, square-bessel,
/// sqrt-square-bessel, lennard-jones, riesz. Pass NaN for an unused `alpha`
/// and 0 for an unused `riesz_a`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fibm_model_new(
    family: *const c_char,
    n: usize,
    beta: f64,
    alpha: f64,
    riesz_a: u32,
    out: *mut *mut FibmModel,
) -> FibmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let family: Family = str_arg(family, "family")?.parse()?;
        let spec = ModelSpec {
            family,
            n_particles: n,
            beta: if family.is_bessel() { 2.0 } else { beta },
            alpha: (!alpha.is_nan()).then_some(alpha),
            riesz_a: (riesz_a != 0).then_some(riesz_a),
            free_potential: None,
        };
        spec.validate()?;
        *out = Box::into_raw(Box::new(FibmModel { spec }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `fibm_model_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fibm_model_free(model: *mut FibmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Spatial dimension of the model.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fibm_model_dimension(model: *const FibmModel, out: *mut usize) -> FibmStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.spec.dimension();
        Ok(())
    })
}

/// Finite-N drift of every particle. `coords` holds n * d values,
/// point-major; `out` receives as many.
///
/// # Safety
/// `coords` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fibm_drift(
    model: *const FibmModel,
    coords: *const f64,
    out: *mut f64,
    len: usize,
) -> FibmStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let x = slice_arg(coords, len, "coords")?;
        if len % m.spec.dimension() != 0 {
            return Err(Fail::Status(
                FibmStatus::InvalidParameter,
                "len is not a multiple of the dimension".into(),
            ));
        }
        let mut b = vec![0.0; len];
        drift_all(&m.spec, x, &mut b)?;
        copy_out(&b, out, len)
    })
}

/// Draws `n_samples` equilibrium configurations; sample k uses stream
/// (seed, k).
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fibm_sample(
    model: *const FibmModel,
    n_samples: usize,
    seed: u64,
    out: *mut *mut FibmSamples,
) -> FibmStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (configs, _) = sample_many(&m.spec, n_samples, seed, &SamplerConfig::default())?;
        *out = Box::into_raw(Box::new(FibmSamples { configs }));
        Ok(())
    })
}

/// # Safety
/// `samples` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fibm_samples_free(samples: *mut FibmSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// Number of configurations.
///
/// # Safety
/// `samples` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fibm_samples_count(samples: *const FibmSamples, out: *mut usize) -> FibmStatus {
    guard(|| {
        let s = deref(samples, "samples")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.configs.len();
        Ok(())
    })
}

/// Copies configuration `k` (point-major coordinates) into `buf`. `needed`
/// receives the number of values, also when `buf` is too small.
///
/// # Safety
/// `buf` must hold `len` values; `needed` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn fibm_samples_get(
    samples: *const FibmSamples,
    k: usize,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FibmStatus {
    guard(|| {
        let s = deref(samples, "samples")?;
        let c = s
            .configs
            .get(k)
            .ok_or_else(|| out_of_bounds("sample", k, s.configs.len()))?;
        if !needed.is_null() {
            *needed = c.coords().len();
        }
        copy_out(c.coords(), buf, len)
    })
}

/// Integrates one path from each sample with the default integrator
/// settings except for the time grid; path p uses stream (seed, p).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fibm_simulate(
    model: *const FibmModel,
    initial: *const FibmSamples,
    dt: f64,
    t_final: f64,
    dt_record: f64,
    seed: u64,
    out: *mut *mut FibmEnsemble,
) -> FibmStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = deref(initial, "initial")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = IntegratorConfig {
            dt,
            t_final,
            dt_record,
            ..IntegratorConfig::default()
        };
        let states = s
            .configs
            .iter()
            .map(|c| label(c, m.spec.default_scheme()))
            .collect::<Result<Vec<_>, _>>()?;
        let ens = simulate(&m.spec, &states, &cfg, seed)?;
        *out = Box::into_raw(Box::new(FibmEnsemble { ens }));
        Ok(())
    })
}

/// # Safety
/// `ens` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fibm_ensemble_free(ens: *mut FibmEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Number of paths and of recorded times.
///
/// # Safety
/// `ens` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fibm_ensemble_shape(
    ens: *const FibmEnsemble,
    n_paths: *mut usize,
    n_records: *mut usize,
) -> FibmStatus {
    guard(|| {
        let e = deref(ens, "ensemble")?;
        if n_paths.is_null() || n_records.is_null() {
            return Err(null("output"));
        }
        *n_paths = e.ens.paths.len();
        *n_records = e.ens.times.len();
        Ok(())
    })
}

/// Copies the labelled state of `path` at record `record` into `buf` and
/// its time into `time`.
///
/// # Safety
/// `buf` must hold `len` values; `time` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn fibm_ensemble_get(
    ens: *const FibmEnsemble,
    path: usize,
    record: usize,
    buf: *mut f64,
    len: usize,
    time: *mut f64,
) -> FibmStatus {
    guard(|| {
        let e = deref(ens, "ensemble")?;
        let p = e
            .ens
            .paths
            .get(path)
            .ok_or_else(|| out_of_bounds("path", path, e.ens.paths.len()))?;
        let state = p
            .states
            .get(record)
            .ok_or_else(|| out_of_bounds("record", record, p.states.len()))?;
        if !time.is_null() {
            *time = e.ens.times[record];
        }
        copy_out(state.coords(), buf, len)
    })
}

/// Kernel value K(x, y) for kernel airy2, bessel (needs `alpha`) or ginibre
/// (x and y are points of the plane, two values each).
///
/// # Safety
/// `x` and `y` must hold the kernel dimension; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fibm_kernel_eval(
    kernel: *const c_char,
    alpha: f64,
    x: *const f64,
    y: *const f64,
    re: *mut f64,
    im: *mut f64,
) -> FibmStatus {
    guard(|| {
        let id: KernelId = str_arg(kernel, "kernel")?.parse()?;
        let spec = match id {
            KernelId::Airy2 => KernelSpec::airy(),
            KernelId::Bessel2Alpha => KernelSpec::bessel(alpha),
            KernelId::Ginibre => KernelSpec::ginibre(),
        };
        let d = spec.dimension();
        let k = spec.eval(slice_arg(x, d, "x")?, slice_arg(y, d, "y")?)?;
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        *re = k.re;
        *im = k.im;
        Ok(())
    })
}
