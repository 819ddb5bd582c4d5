use std::ffi::{c_char, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use finite_ibm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { fibm_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(buf.len()) - 1].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn model(family: &str, n: usize, alpha: f64) -> *mut FibmModel {
    let name = CString::new(family).unwrap();
    let mut m = ptr::null_mut();
    let s = unsafe { fibm_model_new(name.as_ptr(), n, 2.0, alpha, 0, &mut m) };
    assert_eq!(s, FibmStatus::Ok, "{}", last_error());
    m
}

#[test]
fn bad_family_reports_invalid_parameter() {
    let name = CString::new("gue").unwrap();
    let mut m = ptr::null_mut();
    let s = unsafe { fibm_model_new(name.as_ptr(), 3, 2.0, f64::NAN, 0, &mut m) };
    assert_eq!(s, FibmStatus::InvalidParameter);
    assert!(m.is_null());
    assert!(last_error().contains("gue"));
}

#[test]
fn null_handles_are_rejected() {
    let mut d = 0usize;
    let s = unsafe { fibm_model_dimension(ptr::null(), &mut d) };
    assert_eq!(s, FibmStatus::NullPointer);
    let s = unsafe { fibm_model_new(ptr::null(), 3, 2.0, f64::NAN, 0, &mut ptr::null_mut()) };
    assert_eq!(s, FibmStatus::NullPointer);
    unsafe {
        fibm_model_free(ptr::null_mut());
        fibm_samples_free(ptr::null_mut());
        fibm_ensemble_free(ptr::null_mut());
    }
}

#[test]
fn two_particle_airy_drift() {
    // relabelling the particles permutes the drifts
    let m = model("airy", 2, f64::NAN);
    let x = [-1.0, 1.0];
    let mut b = [0.0; 2];
    assert_eq!(unsafe { fibm_drift(m, x.as_ptr(), b.as_mut_ptr(), 2) }, FibmStatus::Ok);
    let mut swapped = [0.0; 2];
    let xs = [1.0, -1.0];
    assert_eq!(unsafe { fibm_drift(m, xs.as_ptr(), swapped.as_mut_ptr(), 2) }, FibmStatus::Ok);
    assert!((b[0] - swapped[1]).abs() < 1e-12 && (b[1] - swapped[0]).abs() < 1e-12);
    let coincident = [0.5, 0.5];
    let s = unsafe { fibm_drift(m, coincident.as_ptr(), b.as_mut_ptr(), 2) };
    assert_eq!(s, FibmStatus::Numerical);
    unsafe { fibm_model_free(m) };
}

#[test]
fn sample_and_simulate_round_trip() {
    let m = model("ginibre", 4, f64::NAN);
    let mut dim = 0;
    assert_eq!(unsafe { fibm_model_dimension(m, &mut dim) }, FibmStatus::Ok);
    assert_eq!(dim, 2);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fibm_sample(m, 3, 11, &mut s) }, FibmStatus::Ok);
    let mut count = 0;
    assert_eq!(unsafe { fibm_samples_count(s, &mut count) }, FibmStatus::Ok);
    assert_eq!(count, 3);

    let mut needed = 0;
    let st = unsafe { fibm_samples_get(s, 0, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(st, FibmStatus::OutOfBounds);
    assert_eq!(needed, 8);
    let mut first = vec![0.0; needed];
    assert_eq!(
        unsafe { fibm_samples_get(s, 0, first.as_mut_ptr(), needed, ptr::null_mut()) },
        FibmStatus::Ok
    );
    assert_eq!(
        unsafe { fibm_samples_get(s, 3, first.as_mut_ptr(), needed, ptr::null_mut()) },
        FibmStatus::OutOfBounds
    );

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { fibm_simulate(m, s, 1e-3, 0.01, 0.005, 5, &mut e) }, FibmStatus::Ok);
    let (mut paths, mut records) = (0, 0);
    assert_eq!(unsafe { fibm_ensemble_shape(e, &mut paths, &mut records) }, FibmStatus::Ok);
    assert_eq!((paths, records), (3, 3));
    let mut state = vec![0.0; 8];
    let mut t = -1.0;
    assert_eq!(
        unsafe { fibm_ensemble_get(e, 0, 0, state.as_mut_ptr(), 8, &mut t) },
        FibmStatus::Ok
    );
    assert_eq!(t, 0.0);
    let mut sorted_a: Vec<[u64; 2]> =
        first.chunks(2).map(|p| [p[0].to_bits(), p[1].to_bits()]).collect();
    let mut sorted_b: Vec<[u64; 2]> =
        state.chunks(2).map(|p| [p[0].to_bits(), p[1].to_bits()]).collect();
    sorted_a.sort();
    sorted_b.sort();
    assert_eq!(sorted_a, sorted_b);

    let bad = unsafe { fibm_simulate(m, s, 1e-3, 0.01, 0.0015, 5, &mut ptr::null_mut()) };
    assert_eq!(bad, FibmStatus::InvalidParameter);
    unsafe {
        fibm_ensemble_free(e);
        fibm_samples_free(s);
        fibm_model_free(m);
    }
}

#[test]
fn kernel_matches_ginibre_closed_form() {
    // K(z, z) = 1 / pi on the whole plane
    let name = CString::new("ginibre").unwrap();
    let z = [0.3, -1.2];
    let (mut re, mut im) = (0.0, 0.0);
    let s = unsafe { fibm_kernel_eval(name.as_ptr(), f64::NAN, z.as_ptr(), z.as_ptr(), &mut re, &mut im) };
    assert_eq!(s, FibmStatus::Ok);
    assert!((re - std::f64::consts::FRAC_1_PI).abs() < 1e-14 && im.abs() < 1e-14);
    let bessel = CString::new("bessel").unwrap();
    let x = [1.0];
    let s = unsafe { fibm_kernel_eval(bessel.as_ptr(), f64::NAN, x.as_ptr(), x.as_ptr(), &mut re, &mut im) };
    assert_eq!(s, FibmStatus::InvalidParameter);
}

#[test]
fn last_error_truncates_and_reports_length() {
    let name = CString::new("nope").unwrap();
    let mut m = ptr::null_mut();
    unsafe { fibm_model_new(name.as_ptr(), 1, 2.0, f64::NAN, 0, &mut m) };
    let full = unsafe { fibm_last_error(ptr::null_mut(), 0) };
    let mut small = [1 as c_char; 4];
    let n = unsafe { fibm_last_error(small.as_mut_ptr(), small.len()) };
    assert_eq!(n, full);
    assert_eq!(small[3], 0);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/finite_ibm.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["fibm_model_new", "fibm_sample", "fibm_simulate", "fibm_kernel_eval", "FIBM_STATUS_NUMERICAL"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"finite_ibm.h\"\nint main(void) { FibmModel *m = 0; size_t d = 0;\n\
         return fibm_model_dimension(m, &d) == FIBM_STATUS_OK; }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found; syntax check skipped");
            return;
        }
    };
    assert!(status.success());
}
