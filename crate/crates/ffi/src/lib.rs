//! C ABI over the `phystime` library.
//!
//! Objects cross the boundary as opaque heap handles created by `pt_*_new`
//! (or `pt_subspace_solve`) and released by the matching `pt_*_free`. Every
//! fallible call returns a [`PtStatus`]; on failure a message for the calling
//! thread is available from [`pt_last_error`] until the next failing call.
//!
//! Matrices are passed as separate row-major real and imaginary arrays.
//! Extended-space indices are system-major (`i * M + m`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phystime::constraint::{self, PhysicalSubspace};
use phystime::linalg::{CMatrix, CVector, Complex64};
use phystime::quantum::{self, ClockSpace, ExtendedSpace, Sign, SystemSpace};
use phystime::scenario;
use phystime::time_observable::{self, TimePOVM};
use phystime::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Numerical = 4,
    BufferSize = 5,
    Panic = 6,
}

/// Constraint solver selector for [`pt_subspace_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtSolveMethod {
    SpectralMatching = 0,
    KernelEigendecomposition = 1,
}

/// Scalar audit figures of a time POVM.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PtPovmDefects {
    pub min_eigenvalue: f64,
    pub completeness_residual: f64,
    pub orthogonality_defect: f64,
    pub idempotency_defect: f64,
}

pub struct PtClock(ClockSpace);

pub struct PtSystem(SystemSpace);

pub struct PtExtended(ExtendedSpace);

pub struct PtSubspace(PhysicalSubspace);

/// The POVM keeps its own copy of the subspace so that coefficient vectors
/// can be turned into physical states without a second handle.
pub struct PtPovm {
    povm: TimePOVM,
    subspace: PhysicalSubspace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Buffer { name: &'static str, expected: usize, actual: usize },
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> PtStatus {
        match self {
            Failure::Core(Error::Config(_)) => PtStatus::Config,
            Failure::Core(e) if e.is_numerical() => PtStatus::Numerical,
            Failure::Core(_) | Failure::Utf8 => PtStatus::InvalidInput,
            Failure::Null(_) => PtStatus::NullPointer,
            Failure::Buffer { .. } => PtStatus::BufferSize,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Null(name) => format!("`{name}` is null"),
            Failure::Buffer { name, expected, actual } => {
                format!("`{name}` has length {actual}, expected {expected}")
            }
            Failure::Utf8 => "string is not valid UTF-8".to_string(),
        }
    }
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message());
            failure.status()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            PtStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(name: &'static str, expected: usize, actual: usize) -> Result<(), Failure> {
    if expected != actual {
        return Err(Failure::Buffer { name, expected, actual });
    }
    Ok(())
}

/// Real part required, imaginary part optional (null means zero).
unsafe fn complex_entries(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Failure> {
    let re = slice(re, len, "re")?;
    let out = if im.is_null() {
        re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    } else {
        let im = slice(im, len, "im")?;
        re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    };
    Ok(out)
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Uniform clock grid of `size` points, spacing `step`, first point
/// `origin`. `sigma` must be +1 or -1.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pt_clock_new(
    size: usize,
    step: f64,
    origin: f64,
    sigma: i32,
    out: *mut *mut PtClock,
) -> PtStatus {
    guard(|| {
        let sign = match sigma {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            other => return Err(Error::InvalidInput(format!("sigma must be +1 or -1, got {other}")).into()),
        };
        let clock = quantum::build_clock(size, step, origin, sign)?;
        store(out, PtClock(clock))
    })
}

/// # Safety
/// `clock` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_clock_free(clock: *mut PtClock) {
    free(clock)
}

/// Number of grid points, 0 for a null handle.
///
/// # Safety
/// `clock` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_clock_size(clock: *const PtClock) -> usize {
    clock.as_ref().map_or(0, |c| c.0.size())
}

/// Copies the grid times into `out` (length must equal the clock size).
///
/// # Safety
/// `clock` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pt_clock_times(clock: *const PtClock, out: *mut f64, len: usize) -> PtStatus {
    guard(|| {
        let clock = deref(clock, "clock")?;
        check_len("out", clock.0.size(), len)?;
        slice_mut(out, len, "out")?.copy_from_slice(clock.0.times());
        Ok(())
    })
}

/// System space from an `n x n` Hermitian matrix given row-major. `im` may
/// be null for a real matrix.
///
/// # Safety
/// `re` (and `im` if non-null) must be valid for `n * n` reads.
#[no_mangle]
pub unsafe extern "C" fn pt_system_new(re: *const f64, im: *const f64, n: usize, out: *mut *mut PtSystem) -> PtStatus {
    guard(|| {
        let entries = complex_entries(re, im, n * n)?;
        let h = CMatrix::from_row_slice(n, n, &entries);
        let system = quantum::build_system_space(&h)?;
        store(out, PtSystem(system))
    })
}

/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_system_free(system: *mut PtSystem) {
    free(system)
}

/// Number of levels, 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_system_dim(system: *const PtSystem) -> usize {
    system.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the ascending energies into `out` (length must equal the dimension).
///
/// # Safety
/// `system` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pt_system_energies(system: *const PtSystem, out: *mut f64, len: usize) -> PtStatus {
    guard(|| {
        let system = deref(system, "system")?;
        check_len("out", system.0.dim(), len)?;
        slice_mut(out, len, "out")?.copy_from_slice(system.0.energies());
        Ok(())
    })
}

/// Extended space of a system and a clock. Both inputs are copied; they may
/// be freed afterwards.
///
/// # Safety
/// `system` and `clock` must be live handles, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pt_extended_new(
    system: *const PtSystem,
    clock: *const PtClock,
    out: *mut *mut PtExtended,
) -> PtStatus {
    guard(|| {
        let system = deref(system, "system")?;
        let clock = deref(clock, "clock")?;
        store(out, PtExtended(quantum::build_extended(&system.0, &clock.0)))
    })
}

/// # Safety
/// `ext` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_extended_free(ext: *mut PtExtended) {
    free(ext)
}

/// `levels * M`, 0 for a null handle.
///
/// # Safety
/// `ext` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_extended_dim(ext: *const PtExtended) -> usize {
    ext.as_ref().map_or(0, |e| e.0.dim())
}

/// Solves the constraint. A non-positive or non-finite `tolerance` selects
/// the default (half the clock frequency step).
///
/// # Safety
/// `ext` must be a live handle, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pt_subspace_solve(
    ext: *const PtExtended,
    method: PtSolveMethod,
    tolerance: f64,
    out: *mut *mut PtSubspace,
) -> PtStatus {
    guard(|| {
        let ext = deref(ext, "ext")?;
        let eps = if tolerance.is_finite() && tolerance > 0.0 {
            tolerance
        } else {
            constraint::default_tolerance(ext.0.clock())
        };
        let sub = match method {
            PtSolveMethod::SpectralMatching => constraint::solve_constraint_spectral(&ext.0, eps)?,
            PtSolveMethod::KernelEigendecomposition => constraint::solve_constraint_kernel(&ext.0, eps)?,
        };
        store(out, PtSubspace(sub))
    })
}

/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_subspace_free(sub: *mut PtSubspace) {
    free(sub)
}

/// Physical dimension `d`, 0 for a null handle.
///
/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_subspace_dim(sub: *const PtSubspace) -> usize {
    sub.as_ref().map_or(0, |s| s.0.dim())
}

/// Number of system levels with no matching clock frequency.
///
/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_subspace_unmatched(sub: *const PtSubspace) -> usize {
    sub.as_ref().map_or(0, |s| s.0.misses().len())
}

/// Time POVM on the physical subspace. Fails with `Numerical` when the
/// subspace is empty.
///
/// # Safety
/// `sub` and `ext` must be live handles, `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_new(
    sub: *const PtSubspace,
    ext: *const PtExtended,
    out: *mut *mut PtPovm,
) -> PtStatus {
    guard(|| {
        let sub = deref(sub, "sub")?;
        let ext = deref(ext, "ext")?;
        let povm = time_observable::build_time_povm(&sub.0, &ext.0)?;
        store(out, PtPovm { povm, subspace: sub.0.clone() })
    })
}

/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_free(povm: *mut PtPovm) {
    free(povm)
}

/// Number of effects (the clock size), 0 for a null handle.
///
/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_len(povm: *const PtPovm) -> usize {
    povm.as_ref().map_or(0, |p| p.povm.len())
}

/// Dimension `d` of each effect, 0 for a null handle.
///
/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_dim(povm: *const PtPovm) -> usize {
    povm.as_ref().map_or(0, |p| p.povm.dim())
}

/// Copies effect `m` row-major into `re` and `im`, each of length `d * d`.
///
/// # Safety
/// `povm` must be a live handle, `re` and `im` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_effect(
    povm: *const PtPovm,
    m: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> PtStatus {
    guard(|| {
        let p = deref(povm, "povm")?;
        if m >= p.povm.len() {
            return Err(Error::InvalidInput(format!("effect index {m} out of range 0..{}", p.povm.len())).into());
        }
        let d = p.povm.dim();
        check_len("re/im", d * d, len)?;
        let re = slice_mut(re, len, "re")?;
        let im = slice_mut(im, len, "im")?;
        let e = p.povm.effect(m);
        for r in 0..d {
            for c in 0..d {
                re[r * d + c] = e[(r, c)].re;
                im[r * d + c] = e[(r, c)].im;
            }
        }
        Ok(())
    })
}

/// Positivity, completeness and projection-valued-measure defects.
///
/// # Safety
/// `povm` must be a live handle, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_defects(povm: *const PtPovm, out: *mut PtPovmDefects) -> PtStatus {
    guard(|| {
        let p = deref(povm, "povm")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let pm = time_observable::pm_violation_report(&p.povm);
        *out = PtPovmDefects {
            min_eigenvalue: p.povm.min_eigenvalue(),
            completeness_residual: p.povm.completeness_residual(),
            orthogonality_defect: pm.orthogonality_defect,
            idempotency_defect: pm.idempotency_defect,
        };
        Ok(())
    })
}

/// Time distribution `p_m` of the physical state with coefficients
/// `c_re + i c_im` (length `d`, normalised internally; `c_im` may be null).
/// `out` must have the clock size.
///
/// # Safety
/// `povm` must be a live handle; the arrays must be valid for their lengths.
#[no_mangle]
pub unsafe extern "C" fn pt_povm_distribution(
    povm: *const PtPovm,
    c_re: *const f64,
    c_im: *const f64,
    d: usize,
    out: *mut f64,
    len: usize,
) -> PtStatus {
    guard(|| {
        let p = deref(povm, "povm")?;
        check_len("c", p.povm.dim(), d)?;
        check_len("out", p.povm.len(), len)?;
        let c = CVector::from_vec(complex_entries(c_re, c_im, d)?);
        let phys = constraint::make_physical_state(&p.subspace, &c)?;
        let dist = time_observable::time_distribution(&p.povm, &phys)?;
        slice_mut(out, len, "out")?.copy_from_slice(&dist);
        Ok(())
    })
}

/// Runs a scenario given as TOML text and writes its JSON report to
/// `*out_json` (release with [`pt_string_free`]). `*passed` receives whether
/// every check came out as expected. Scenario check failures are not an
/// error status.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out_json` and `passed` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_scenario_run(
    config: *const c_char,
    out_json: *mut *mut c_char,
    passed: *mut bool,
) -> PtStatus {
    guard(|| {
        let text = deref(config, "config")?;
        if out_json.is_null() {
            return Err(Failure::Null("out_json"));
        }
        if passed.is_null() {
            return Err(Failure::Null("passed"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|_| Failure::Utf8)?;
        let cfg = scenario::parse_config(text)?;
        let report = scenario::run_scenario(&cfg)?;
        let json = phystime::serial::to_json(&report)?;
        *passed = report.passed;
        *out_json = CString::new(json).map_err(|_| Failure::Utf8)?.into_raw();
        Ok(())
    })
}
