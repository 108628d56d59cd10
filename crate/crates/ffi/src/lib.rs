//! C ABI over the parawave toolkit.
//!
//! Every object crosses the boundary as an opaque handle owned by the caller and released with the
//! matching `*_free`. Fallible calls return a [`PwStatus`]; on failure the message is kept per thread
//! and read back with [`pw_last_error_message`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use parawave::error::Error;
use parawave::meyer::{MeyerBasis, WaveletCoefficients};
use parawave::solver::{picard_solve, preset_data, Preset, SolverConfig, SolverState, SolverStatus};
use parawave::spectral::{FrequencyLattice, SpectralField};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    ShapeMismatch = 4,
    Aliasing = 5,
    InadmissibleLevel = 6,
    Leakage = 7,
    Precondition = 8,
    Certification = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwPreset {
    SingleAtom = 0,
    Random = 1,
    TaylorGreen = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwSolverStatus {
    Converged = 0,
    NonContraction = 1,
    CapReached = 2,
}

/// A frequency lattice together with its wavelet basis.
pub struct PwLattice {
    basis: MeyerBasis,
}

/// A scalar field on a lattice.
pub struct PwField {
    field: SpectralField,
}

/// Wavelet coefficients with a flat entry table for indexed access.
pub struct PwCoefficients {
    coefficients: WaveletCoefficients,
    entries: Vec<(u8, u32, Vec<usize>, f64, f64)>,
}

/// The outcome of a Picard run.
pub struct PwSolver {
    state: SolverState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> PwStatus {
    match e {
        Error::Domain(_) => PwStatus::Domain,
        Error::ShapeMismatch(_) => PwStatus::ShapeMismatch,
        Error::Aliasing { .. } => PwStatus::Aliasing,
        Error::InadmissibleLevel { .. } => PwStatus::InadmissibleLevel,
        Error::Leakage { .. } => PwStatus::Leakage,
        Error::Precondition(_) => PwStatus::Precondition,
        Error::Certification(_) => PwStatus::Certification,
        Error::InvalidRamp(_) | Error::Config(_) => PwStatus::InvalidArgument,
        Error::Io(_) | Error::Json(_) => PwStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PwStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PwStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(msg);
            PwStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            PwStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes a handle returned by this library or null.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn put<T>(out: *mut *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: `p` came from `Box::into_raw` in `put` and is released once.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Copies the last error of this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: `buf` holds `len > n` bytes.
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Creates a lattice of `size^dim` points (`dim` 2 or 3, `size` a power of two >= 16).
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn pw_lattice_new(dim: usize, size: usize, out: *mut *mut PwLattice) -> PwStatus {
    guard(|| {
        if size < 16 {
            return Err(Failure::Invalid(format!("size must be at least 16, got {size}")));
        }
        let lattice = FrequencyLattice::new(dim, size)?;
        put(out, PwLattice { basis: MeyerBasis::with_default_window(lattice) }, "out")
    })
}

/// # Safety
/// `lattice` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_lattice_free(lattice: *mut PwLattice) {
    unsafe { free(lattice) }
}

/// Finest atom level, or -1 for a null handle.
///
/// # Safety
/// `lattice` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_lattice_max_level(lattice: *const PwLattice) -> i32 {
    unsafe { lattice.as_ref() }.map_or(-1, |l| l.basis.max_level() as i32)
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `lattice` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_lattice_points(lattice: *const PwLattice) -> usize {
    unsafe { lattice.as_ref() }.map_or(0, |l| l.basis.lattice().len())
}

/// Builds a real field from row-major point values at `x = p / size`.
///
/// # Safety
/// `samples` must point to `len` doubles; `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn pw_field_from_samples(
    lattice: *const PwLattice,
    samples: *const f64,
    len: usize,
    out: *mut *mut PwField,
) -> PwStatus {
    guard(|| {
        let lat = unsafe { get(lattice, "lattice") }?.basis.lattice();
        if samples.is_null() {
            return Err(Failure::Null("samples"));
        }
        // SAFETY: the caller guarantees `len` readable doubles.
        let values = unsafe { std::slice::from_raw_parts(samples, len) };
        put(out, PwField { field: SpectralField::from_physical(lat, values)? }, "out")
    })
}

/// Writes the real part of the point values; `len` must equal the lattice point count.
///
/// # Safety
/// `field` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pw_field_samples(field: *const PwField, out: *mut f64, len: usize) -> PwStatus {
    guard(|| {
        let f = &unsafe { get(field, "field") }?.field;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let phys = f.to_physical();
        if phys.len() != len {
            return Err(Failure::Invalid(format!("buffer holds {len} values, field has {}", phys.len())));
        }
        // SAFETY: `out` holds `len` doubles.
        let dst = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (d, v) in dst.iter_mut().zip(phys) {
            *d = v.re;
        }
        Ok(())
    })
}

/// L2 norm of the field over the unit torus, or NaN for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_field_norm(field: *const PwField) -> f64 {
    unsafe { field.as_ref() }.map_or(f64::NAN, |f| f.field.norm_l2())
}

/// # Safety
/// `field` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_field_free(field: *mut PwField) {
    unsafe { free(field) }
}

/// Wavelet coefficients of `field` on levels `0..=max_level`.
///
/// # Safety
/// Handles must be live; `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn pw_analyze(
    lattice: *const PwLattice,
    field: *const PwField,
    out: *mut *mut PwCoefficients,
) -> PwStatus {
    guard(|| {
        let basis = &unsafe { get(lattice, "lattice") }?.basis;
        let f = &unsafe { get(field, "field") }?.field;
        let coefficients = basis.analyze(f, 0, basis.max_level())?;
        let entries = coefficients
            .entries()
            .map(|(eps, j, flat, v)| (eps, j, coefficients.unflatten_k(j, flat), v.re, v.im))
            .collect();
        put(out, PwCoefficients { coefficients, entries }, "out")
    })
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `coefficients` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_coefficients_len(coefficients: *const PwCoefficients) -> usize {
    unsafe { coefficients.as_ref() }.map_or(0, |c| c.entries.len())
}

/// Entry `index`: band `eps` (0 is the scaling band), level `j`, translation `k` and value.
/// `k` receives `dim` entries.
///
/// # Safety
/// `coefficients` must be live; every output pointer must be writable, `k` for `dim` entries.
#[no_mangle]
pub unsafe extern "C" fn pw_coefficients_entry(
    coefficients: *const PwCoefficients,
    index: usize,
    eps: *mut u8,
    j: *mut u32,
    k: *mut usize,
    re: *mut f64,
    im: *mut f64,
) -> PwStatus {
    guard(|| {
        let c = unsafe { get(coefficients, "coefficients") }?;
        let (e, level, kk, r, i) = c
            .entries
            .get(index)
            .ok_or_else(|| Failure::Invalid(format!("index {index} out of range ({} entries)", c.entries.len())))?;
        if eps.is_null() || j.is_null() || k.is_null() || re.is_null() || im.is_null() {
            return Err(Failure::Null("output"));
        }
        // SAFETY: all outputs checked non-null; `k` holds `dim` slots.
        unsafe {
            *eps = *e;
            *j = *level;
            std::ptr::copy_nonoverlapping(kk.as_ptr(), k, kk.len());
            *re = *r;
            *im = *i;
        }
        Ok(())
    })
}

/// # Safety
/// `coefficients` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_coefficients_free(coefficients: *mut PwCoefficients) {
    unsafe { free(coefficients) }
}

/// Rebuilds the field from its coefficients.
///
/// # Safety
/// Handles must be live; `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn pw_synthesize(
    lattice: *const PwLattice,
    coefficients: *const PwCoefficients,
    out: *mut *mut PwField,
) -> PwStatus {
    guard(|| {
        let basis = &unsafe { get(lattice, "lattice") }?.basis;
        let c = unsafe { get(coefficients, "coefficients") }?;
        put(out, PwField { field: basis.synthesize(&c.coefficients)? }, "out")
    })
}

/// Runs the Picard iteration with default settings for preset data of critical norm `scale`.
///
/// # Safety
/// `lattice` must be live; `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn pw_solve(
    lattice: *const PwLattice,
    preset: PwPreset,
    scale: f64,
    seed: u64,
    out: *mut *mut PwSolver,
) -> PwStatus {
    guard(|| {
        let basis = &unsafe { get(lattice, "lattice") }?.basis;
        let preset = match preset {
            PwPreset::SingleAtom => Preset::SingleAtom,
            PwPreset::Random => Preset::Random,
            PwPreset::TaylorGreen => Preset::TaylorGreen,
        };
        let cfg = SolverConfig::default();
        let a = preset_data(basis, preset, scale, cfg.p, seed)?;
        put(out, PwSolver { state: picard_solve(basis, &a, &cfg)? }, "out")
    })
}

/// # Safety
/// `solver` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_status(solver: *const PwSolver, out: *mut PwSolverStatus) -> PwStatus {
    guard(|| {
        let s = unsafe { get(solver, "solver") }?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let status = match s.state.status {
            SolverStatus::Converged => PwSolverStatus::Converged,
            SolverStatus::NonContraction => PwSolverStatus::NonContraction,
            SolverStatus::CapReached => PwSolverStatus::CapReached,
        };
        // SAFETY: checked non-null.
        unsafe { *out = status };
        Ok(())
    })
}

/// Copies up to `len` increment norms into `out`; returns how many iterations ran.
///
/// # Safety
/// `solver` must be null or live; `out` must be null or point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_increments(solver: *const PwSolver, out: *mut f64, len: usize) -> usize {
    let Some(s) = (unsafe { solver.as_ref() }) else { return 0 };
    let inc = &s.state.increments;
    if !out.is_null() {
        let n = inc.len().min(len);
        // SAFETY: `out` holds `len >= n` doubles.
        unsafe { std::ptr::copy_nonoverlapping(inc.as_ptr(), out, n) };
    }
    inc.len()
}

/// Residual of the mild formulation at the final iterate, or NaN for a null handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_residual(solver: *const PwSolver) -> f64 {
    unsafe { solver.as_ref() }.map_or(f64::NAN, |s| s.state.residual)
}

/// # Safety
/// `solver` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_solver_free(solver: *mut PwSolver) {
    unsafe { free(solver) }
}
