//! C ABI for the sldlab core library.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`SldlabStatus`]; on failure a description is available from
//! [`sldlab_last_error`] on the same thread. Results are written through
//! caller-provided pointers, and arrays into caller-provided buffers whose
//! length is passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sldlab::dynamics::{evolve, product_pm_readout, state_derivative, Generator, GeneratorKind, ReadoutBasis};
use sldlab::golden::{run_suite, SuiteOptions};
use sldlab::operator::{DenseOperator, C64};
use sldlab::sld::{check_saturation, classical_fisher, cramer_rao_bound, quantum_fisher};
use sldlab::solver::closed_form_solution;
use sldlab::state::{cat_state, optimal_single_qubit, tensor_power, DensityMatrix, Sign};
use sldlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SldlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionExceeded = 3,
    /// Matrix is not Hermitian, unit-trace and positive semidefinite.
    NotPhysical = 4,
    /// The defining equation of an operator has no consistent solution.
    Inconsistent = 5,
    /// The model carries no information about the parameter.
    Degenerate = 6,
    Unsupported = 7,
    Infeasible = 8,
    /// Numerical failure or a caught panic.
    Internal = 9,
    /// Output buffer shorter than required; the message states the needed length.
    BufferTooSmall = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SldlabGeneratorKind {
    /// ½ Σ_j σ₃⁽ʲ⁾
    NonEntangling = 0,
    /// ½ σ₃^{⊗N}
    Entangling = 1,
}

impl From<SldlabGeneratorKind> for GeneratorKind {
    fn from(k: SldlabGeneratorKind) -> Self {
        match k {
            SldlabGeneratorKind::NonEntangling => GeneratorKind::NonEntangling,
            SldlabGeneratorKind::Entangling => GeneratorKind::Entangling,
        }
    }
}

/// Density matrix handle.
pub struct SldlabState(DensityMatrix);
/// Generator handle.
pub struct SldlabGenerator(Generator);
/// Projective readout handle.
pub struct SldlabBasis(ReadoutBasis);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SldlabFisher {
    pub classical: f64,
    pub quantum: f64,
    /// 1 when the readout saturates the quantum bound.
    pub saturated: u8,
    pub im_condition_max: f64,
    pub diagonal_residual: f64,
    /// 1/√(ν F_classical); +∞ when F_classical = 0.
    pub bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SldlabStatus {
    match e {
        Error::DimensionExceeded { .. } => SldlabStatus::DimensionExceeded,
        Error::DimensionMismatch { .. } | Error::NotPowerOfTwo(_) | Error::InvalidArgument(_) => SldlabStatus::InvalidArgument,
        Error::NotHermitian { .. } | Error::BadTrace { .. } | Error::NotPositive { .. } => SldlabStatus::NotPhysical,
        Error::InconsistentDerivative { .. } | Error::UndefinedLambda { .. } | Error::SingularOutcome { .. } => SldlabStatus::Inconsistent,
        Error::Unbounded(_) | Error::DegenerateModel(_) => SldlabStatus::Degenerate,
        Error::Unsupported(_) => SldlabStatus::Unsupported,
        Error::Infeasible { .. } => SldlabStatus::Infeasible,
        Error::NoConvergence { .. } => SldlabStatus::Internal,
    }
}

struct Fail(SldlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording failures and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SldlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SldlabStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SldlabStatus::Internal
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(SldlabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail(SldlabStatus::NullPointer, format!("{what} is null")));
    }
    p.write(value);
    Ok(())
}

fn sign_of(sign: i32) -> Result<Sign, Fail> {
    match sign {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        _ => Err(Fail(SldlabStatus::InvalidArgument, format!("sign must be +1 or -1, got {sign}"))),
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sldlab_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn sldlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Caps the number of qubits any object may have (default 10).
#[no_mangle]
pub extern "C" fn sldlab_set_max_qubits(cap: usize) -> SldlabStatus {
    guard(|| {
        if cap == 0 {
            return Err(Fail(SldlabStatus::InvalidArgument, "cap must be at least 1".into()));
        }
        sldlab::operator::set_max_qubits(cap);
        Ok(())
    })
}

/// Density matrix from row-major real and imaginary parts of length dim².
/// `imag` may be null for a real matrix.
///
/// # Safety
/// `real` (and `imag` if non-null) must point to dim² doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_from_matrix(dim: usize, real: *const f64, imag: *const f64, out: *mut *mut SldlabState) -> SldlabStatus {
    guard(|| {
        if real.is_null() {
            return Err(Fail(SldlabStatus::NullPointer, "real is null".into()));
        }
        let n = dim.checked_mul(dim).ok_or_else(|| Fail(SldlabStatus::InvalidArgument, "dimension overflows".into()))?;
        let re = std::slice::from_raw_parts(real, n);
        let im = if imag.is_null() { None } else { Some(std::slice::from_raw_parts(imag, n)) };
        let entries = (0..n).map(|k| C64::new(re[k], im.map_or(0.0, |v| v[k]))).collect();
        let rho = DensityMatrix::new(DenseOperator::from_row_major(entries)?)?;
        write(out, boxed(SldlabState(rho)), "out")
    })
}

/// ½(𝟙 + sign·σ₂)^{⊗n}, sign = ±1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_optimal_product(n_qubits: usize, sign: i32, out: *mut *mut SldlabState) -> SldlabStatus {
    guard(|| {
        let rho = tensor_power(&optimal_single_qubit(sign_of(sign)?), n_qubits)?;
        write(out, boxed(SldlabState(rho)), "out")
    })
}

/// (|0…0⟩ + sign·|1…1⟩)/√2, sign = ±1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_cat(n_qubits: usize, sign: i32, out: *mut *mut SldlabState) -> SldlabStatus {
    guard(|| {
        let rho = cat_state(n_qubits, sign_of(sign)?)?;
        write(out, boxed(SldlabState(rho)), "out")
    })
}

/// Number of qubits of a state.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_n_qubits(state: *const SldlabState, out: *mut usize) -> SldlabStatus {
    guard(|| {
        let s = borrow(state, "state")?;
        write(out, s.0.n_qubits(), "out")
    })
}

/// Copies the dim² row-major entries into `real` and `imag`.
///
/// # Safety
/// `state` must be a live handle; `real` and `imag` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_matrix(state: *const SldlabState, real: *mut f64, imag: *mut f64, len: usize) -> SldlabStatus {
    guard(|| {
        let s = borrow(state, "state")?;
        let entries = s.0.op().as_slice();
        if len < entries.len() {
            return Err(Fail(SldlabStatus::BufferTooSmall, format!("need {} entries, buffer holds {len}", entries.len())));
        }
        if real.is_null() || imag.is_null() {
            return Err(Fail(SldlabStatus::NullPointer, "output buffer is null".into()));
        }
        for (k, z) in entries.iter().enumerate() {
            *real.add(k) = z.re;
            *imag.add(k) = z.im;
        }
        Ok(())
    })
}

/// ρ(x) = e^{−ixH} ρ e^{ixH} as a new handle.
///
/// # Safety
/// `state` and `generator` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_evolve(
    state: *const SldlabState,
    generator: *const SldlabGenerator,
    x: f64,
    out: *mut *mut SldlabState,
) -> SldlabStatus {
    guard(|| {
        let rho = evolve(&borrow(state, "state")?.0, &borrow(generator, "generator")?.0, x)?;
        write(out, boxed(SldlabState(rho)), "out")
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sldlab_state_free(state: *mut SldlabState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_generator_new(kind: SldlabGeneratorKind, n_qubits: usize, out: *mut *mut SldlabGenerator) -> SldlabStatus {
    guard(|| {
        let g = Generator::of_kind(kind.into(), n_qubits)?;
        write(out, boxed(SldlabGenerator(g)), "out")
    })
}

/// # Safety
/// `generator` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sldlab_generator_free(generator: *mut SldlabGenerator) {
    if !generator.is_null() {
        drop(Box::from_raw(generator));
    }
}

/// Product σ₁-eigenbasis readout, outcomes ordered ++…, …, −−….
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_basis_product_pm(n_qubits: usize, out: *mut *mut SldlabBasis) -> SldlabStatus {
    guard(|| write(out, boxed(SldlabBasis(product_pm_readout(n_qubits)?)), "out"))
}

/// # Safety
/// `basis` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sldlab_basis_free(basis: *mut SldlabBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Fisher information and saturation of `state` under `generator`, read out
/// in `basis`, with `repetitions` shots for the bound.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_fisher(
    state: *const SldlabState,
    generator: *const SldlabGenerator,
    basis: *const SldlabBasis,
    repetitions: u64,
    out: *mut SldlabFisher,
) -> SldlabStatus {
    guard(|| {
        let rho = &borrow(state, "state")?.0;
        let g = &borrow(generator, "generator")?.0;
        let b = &borrow(basis, "basis")?.0;
        let d = state_derivative(g, rho)?;
        let classical = classical_fisher(b, rho, &d)?;
        let sat = check_saturation(b, rho, &d)?;
        let bound = match cramer_rao_bound(classical, repetitions) {
            Ok(v) => v,
            Err(Error::Unbounded(_)) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        let f = SldlabFisher {
            classical,
            quantum: quantum_fisher(rho, &d)?,
            saturated: sat.saturated as u8,
            im_condition_max: sat.im_condition_max,
            diagonal_residual: sat.diagonal_residual,
            bound,
        };
        write(out, f, "out")
    })
}

/// Analytic optimal state for `kind` and `n_qubits`, with its real 1/λ per
/// outcome written to `inv_lambdas` (length 2ⁿ) and ⟨L²⟩ to `qfi`.
///
/// # Safety
/// `inv_lambdas` must hold `len` doubles; `out_state` and `qfi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_closed_form(
    kind: SldlabGeneratorKind,
    n_qubits: usize,
    out_state: *mut *mut SldlabState,
    inv_lambdas: *mut f64,
    len: usize,
    qfi: *mut f64,
) -> SldlabStatus {
    guard(|| {
        let s = closed_form_solution(kind.into(), n_qubits)?;
        let values = s.inv_lambdas.real_values();
        if len < values.len() {
            return Err(Fail(SldlabStatus::BufferTooSmall, format!("need {} entries, buffer holds {len}", values.len())));
        }
        if inv_lambdas.is_null() {
            return Err(Fail(SldlabStatus::NullPointer, "inv_lambdas is null".into()));
        }
        write(qfi, s.qfi, "qfi")?;
        std::ptr::copy_nonoverlapping(values.as_ptr(), inv_lambdas, values.len());
        write(out_state, boxed(SldlabState(s.state)), "out_state")
    })
}

/// Runs the verification suite; counts are written to `passed` and `failed`
/// (checks that could not run count as failed).
///
/// # Safety
/// `passed` and `failed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sldlab_verify(passed: *mut usize, failed: *mut usize) -> SldlabStatus {
    guard(|| {
        let results = run_suite(None, &SuiteOptions::default());
        let ok = results.iter().filter(|r| r.passed).count();
        write(passed, ok, "passed")?;
        write(failed, results.len() - ok, "failed")
    })
}
