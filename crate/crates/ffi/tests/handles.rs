use std::ptr;

use parawave_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { pw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn lattice(size: usize) -> *mut PwLattice {
    let mut lat = ptr::null_mut();
    assert_eq!(unsafe { pw_lattice_new(2, size, &mut lat) }, PwStatus::Ok);
    lat
}

#[test]
fn field_round_trips_through_coefficients() {
    let lat = lattice(32);
    let n = unsafe { pw_lattice_points(lat) };
    assert_eq!(n, 32 * 32);
    assert_eq!(unsafe { pw_lattice_max_level(lat) }, 3);
    let samples: Vec<f64> = (0..n)
        .map(|p| {
            let (x, y) = ((p / 32) as f64 / 32.0, (p % 32) as f64 / 32.0);
            (2.0 * std::f64::consts::PI * (x + 2.0 * y)).sin()
        })
        .collect();
    let mut field = ptr::null_mut();
    assert_eq!(unsafe { pw_field_from_samples(lat, samples.as_ptr(), n, &mut field) }, PwStatus::Ok);
    let mut coeffs = ptr::null_mut();
    assert_eq!(unsafe { pw_analyze(lat, field, &mut coeffs) }, PwStatus::Ok);
    let len = unsafe { pw_coefficients_len(coeffs) };
    assert!(len > 0);
    let (mut eps, mut j, mut k, mut re, mut im) = (0u8, 0u32, [0usize; 2], 0.0, 0.0);
    let mut energy = 0.0;
    for i in 0..len {
        let s = unsafe { pw_coefficients_entry(coeffs, i, &mut eps, &mut j, k.as_mut_ptr(), &mut re, &mut im) };
        assert_eq!(s, PwStatus::Ok);
        assert!(k.iter().all(|&x| x < 1 << j));
        energy += re * re + im * im;
    }
    let norm = unsafe { pw_field_norm(field) };
    assert!((energy.sqrt() - norm).abs() < 1e-12 * norm);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { pw_synthesize(lat, coeffs, &mut back) }, PwStatus::Ok);
    let mut out = vec![0.0; n];
    assert_eq!(unsafe { pw_field_samples(back, out.as_mut_ptr(), n) }, PwStatus::Ok);
    let err = samples.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
    let s = unsafe { pw_coefficients_entry(coeffs, len, &mut eps, &mut j, k.as_mut_ptr(), &mut re, &mut im) };
    assert_eq!(s, PwStatus::InvalidArgument);
    unsafe {
        pw_field_free(back);
        pw_coefficients_free(coeffs);
        pw_field_free(field);
        pw_lattice_free(lat);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut lat = ptr::null_mut();
    assert_eq!(unsafe { pw_lattice_new(2, 8, &mut lat) }, PwStatus::InvalidArgument);
    assert!(lat.is_null());
    assert!(last_error().contains("16"));
    assert_eq!(unsafe { pw_lattice_new(4, 32, &mut lat) }, PwStatus::Domain);
    assert_eq!(unsafe { pw_lattice_new(2, 32, ptr::null_mut()) }, PwStatus::NullPointer);
    let lat = lattice(16);
    let mut field = ptr::null_mut();
    let short = [0.0; 10];
    assert_eq!(unsafe { pw_field_from_samples(lat, short.as_ptr(), 10, &mut field) }, PwStatus::ShapeMismatch);
    assert!(last_error().contains("sample count"));
    assert_eq!(unsafe { pw_analyze(lat, ptr::null(), ptr::null_mut()) }, PwStatus::NullPointer);
    assert!(unsafe { pw_field_norm(ptr::null()) }.is_nan());
    assert_eq!(unsafe { pw_lattice_max_level(ptr::null()) }, -1);
    unsafe {
        pw_field_free(ptr::null_mut());
        pw_lattice_free(lat);
    }
    let n = unsafe { pw_last_error_message(ptr::null_mut(), 0) };
    assert!(n > 0);
}

#[test]
fn solver_handle_reports_the_run() {
    let lat = lattice(32);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pw_solve(lat, PwPreset::SingleAtom, 1e-3, 0, &mut s) }, PwStatus::Ok);
    let mut status = PwSolverStatus::CapReached;
    assert_eq!(unsafe { pw_solver_status(s, &mut status) }, PwStatus::Ok);
    assert_eq!(status, PwSolverStatus::Converged);
    let count = unsafe { pw_solver_increments(s, ptr::null_mut(), 0) };
    let mut inc = vec![0.0; count];
    assert_eq!(unsafe { pw_solver_increments(s, inc.as_mut_ptr(), count) }, count);
    assert!(inc.windows(2).all(|w| w[1] < 0.5 * w[0]), "{inc:?}");
    assert!(unsafe { pw_solver_residual(s) } < 1e-4);
    unsafe { pw_solver_free(s) };

    let mut big = ptr::null_mut();
    assert_eq!(unsafe { pw_solve(lat, PwPreset::SingleAtom, 100.0, 0, &mut big) }, PwStatus::Ok);
    assert_eq!(unsafe { pw_solver_status(big, &mut status) }, PwStatus::Ok);
    assert_ne!(status, PwSolverStatus::Converged);
    unsafe {
        pw_solver_free(big);
        pw_lattice_free(lat);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/parawave.h")).unwrap();
    for name in ["pw_lattice_new", "pw_analyze", "pw_synthesize", "pw_solve", "pw_last_error_message", "PW_STATUS_OK"] {
        assert!(header.contains(name), "{name}");
    }
    assert!(header.contains("typedef struct PwField PwField"));
}
