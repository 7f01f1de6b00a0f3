//! C interface: opaque cell handles, status codes and a per-thread error
//! message. Every function returns a `QresStatus`; outputs go through
//! pointer arguments and are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use qres::analysis::Cell;
use qres::costs::Method;
use qres::QresError;

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QresStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Index = 5,
    Consistency = 6,
    Dimension = 7,
    Normalization = 8,
    Kind = 9,
    Orthogonality = 10,
    Symmetry = 11,
    Solver = 12,
    Argument = 13,
    Pool = 14,
    State = 15,
    Panic = 16,
}

impl From<&QresError> for QresStatus {
    fn from(e: &QresError) -> Self {
        match e {
            QresError::Io(_) => QresStatus::Io,
            QresError::Parse(_) => QresStatus::Parse,
            QresError::Index(_) => QresStatus::Index,
            QresError::Consistency(_) => QresStatus::Consistency,
            QresError::Dimension(_) => QresStatus::Dimension,
            QresError::Normalization(_) => QresStatus::Normalization,
            QresError::Kind(_) => QresStatus::Kind,
            QresError::Orthogonality(_) => QresStatus::Orthogonality,
            QresError::Symmetry(_) => QresStatus::Symmetry,
            QresError::Solver(_) => QresStatus::Solver,
            QresError::Argument(_) => QresStatus::Argument,
            QresError::Pool => QresStatus::Pool,
            QresError::State(_) => QresStatus::State,
        }
    }
}

/// Partitioning method.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QresMethod {
    FcSi = 0,
    AcSi = 1,
    Lr = 2,
    LrF3 = 3,
    LrLcu = 4,
}

impl From<QresMethod> for Method {
    fn from(m: QresMethod) -> Self {
        match m {
            QresMethod::FcSi => Method::FcSi,
            QresMethod::AcSi => Method::AcSi,
            QresMethod::Lr => Method::Lr,
            QresMethod::LrF3 => Method::LrF3,
            QresMethod::LrLcu => Method::LrLcu,
        }
    }
}

/// Opaque handle to a loaded Hamiltonian with cached reference solutions.
pub struct QresCell(Cell);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QresStatus>) -> QresStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            QresStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            QresStatus::Panic
        }
    }
}

fn check(e: QresError) -> QresStatus {
    set_error(e.to_string());
    QresStatus::from(&e)
}

fn null() -> QresStatus {
    set_error("null pointer argument".into());
    QresStatus::NullPointer
}

/// # Safety
/// `cell` must be null or a handle from `qres_cell_load` not yet freed.
unsafe fn cell_ref<'a>(cell: *const QresCell) -> Result<&'a Cell, QresStatus> {
    cell.as_ref().map(|c| &c.0).ok_or_else(null)
}

/// Loads an FCIDUMP (or `.pauli` text) file into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qres_cell_load(path: *const c_char, out: *mut *mut QresCell) -> QresStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return Err(null());
        }
        let p = CStr::from_ptr(path).to_str().map_err(|_| {
            set_error("path is not valid UTF-8".into());
            QresStatus::InvalidUtf8
        })?;
        let cell = Cell::load(Path::new(p)).map_err(check)?;
        *out = Box::into_raw(Box::new(QresCell(cell)));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `cell` must be null or a handle from `qres_cell_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qres_cell_free(cell: *mut QresCell) {
    if !cell.is_null() {
        drop(Box::from_raw(cell));
    }
}

/// Number of qubits of the cell's Hamiltonian.
///
/// # Safety
/// `cell` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qres_cell_n_qubits(cell: *const QresCell, out: *mut usize) -> QresStatus {
    guard(|| {
        let c = cell_ref(cell)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = c.n_qubits();
        Ok(())
    })
}

/// Lowest eigenvalue in the electron-number sector, in hartree.
///
/// # Safety
/// `cell` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qres_ground_energy(cell: *const QresCell, out: *mut f64) -> QresStatus {
    guard(|| {
        let c = cell_ref(cell)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = c.ground_energy().map_err(check)?;
        Ok(())
    })
}

/// LCU 1-norm and unitary (AC-SI) or fragment (LR, LR-LCU) count,
/// optionally after the optimal electron-number shift. `count` may be null.
///
/// # Safety
/// `cell` must be a live handle, `lambda` a valid pointer and `count` null
/// or valid.
#[no_mangle]
pub unsafe extern "C" fn qres_lcu_lambda(
    cell: *const QresCell,
    method: QresMethod,
    shift: bool,
    lambda: *mut f64,
    count: *mut usize,
) -> QresStatus {
    guard(|| {
        let c = cell_ref(cell)?;
        let lambda = lambda.as_mut().ok_or_else(null)?;
        let r = c.lcu_cost(method.into(), shift).map_err(check)?;
        *lambda = r.lambda.unwrap_or(f64::NAN);
        if let Some(n) = count.as_mut() {
            *n = r.n_unitaries.or(r.n_fragments).unwrap_or(0);
        }
        Ok(())
    })
}

/// Measurement count `M(ε)` for FC-SI, LR or LR-F3 fragments.
///
/// # Safety
/// `cell` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qres_measurement_count(
    cell: *const QresCell,
    method: QresMethod,
    epsilon: f64,
    out: *mut f64,
) -> QresStatus {
    guard(|| {
        let c = cell_ref(cell)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = c.measure_cost(method.into(), epsilon).map_err(check)?.m_eps.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Symmetry-projected commutator norm `κ_Q` and the first-order Trotter
/// step count for FC-SI, LR or LR-LCU fragments. `steps` may be null.
///
/// # Safety
/// `cell` must be a live handle, `kappa` a valid pointer and `steps` null
/// or valid.
#[no_mangle]
pub unsafe extern "C" fn qres_trotter_cost(
    cell: *const QresCell,
    method: QresMethod,
    epsilon: f64,
    kappa: *mut f64,
    steps: *mut u64,
) -> QresStatus {
    guard(|| {
        let c = cell_ref(cell)?;
        let kappa = kappa.as_mut().ok_or_else(null)?;
        let r = c.trotter_cost(method.into(), epsilon, None).map_err(check)?;
        *kappa = r.kappa_q.unwrap_or(f64::NAN);
        if let (Some(s), Some(t)) = (steps.as_mut(), r.trotter) {
            *s = t.n_steps;
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qres_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Stable name of a status code.
#[no_mangle]
pub extern "C" fn qres_status_name(status: QresStatus) -> *const c_char {
    let s: &'static CStr = match status {
        QresStatus::Ok => c"Ok",
        QresStatus::NullPointer => c"NullPointer",
        QresStatus::InvalidUtf8 => c"InvalidUtf8",
        QresStatus::Io => c"IoError",
        QresStatus::Parse => c"ParseError",
        QresStatus::Index => c"IndexError",
        QresStatus::Consistency => c"ConsistencyError",
        QresStatus::Dimension => c"DimensionError",
        QresStatus::Normalization => c"NormalizationError",
        QresStatus::Kind => c"KindError",
        QresStatus::Orthogonality => c"OrthogonalityError",
        QresStatus::Symmetry => c"SymmetryError",
        QresStatus::Solver => c"SolverError",
        QresStatus::Argument => c"ArgumentError",
        QresStatus::Pool => c"PoolError",
        QresStatus::State => c"StateError",
        QresStatus::Panic => c"Panic",
    };
    s.as_ptr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_names_match_error_kinds() {
        let errors = [
            QresError::Parse(String::new()),
            QresError::Symmetry(String::new()),
            QresError::Pool,
            QresError::Io(std::io::Error::other("x")),
        ];
        for e in errors {
            let name = unsafe { CStr::from_ptr(qres_status_name(QresStatus::from(&e))) };
            assert_eq!(name.to_str().unwrap(), e.kind_name());
        }
    }

    #[test]
    fn null_arguments_are_reported() {
        let mut out = 0usize;
        let s = unsafe { qres_cell_n_qubits(std::ptr::null(), &mut out) };
        assert_eq!(s, QresStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(qres_last_error()) };
        assert!(!msg.to_bytes().is_empty());
    }
}
