//! C ABI for `wctop`.
//!
//! Objects are opaque handles created by `*_new` and released by the matching `*_free`.
//! Every fallible function returns a [`WctStatus`]; on failure a message is available from
//! [`wct_last_error`] on the same thread until the next failing call. Strings handed out by
//! the library must be released with [`wct_string_free`].
//!
//! Panics never cross the boundary: they are caught and reported as `WCT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wctop::classify;
use wctop::cli::classify_problem;
use wctop::linop::{Operator, DENSE_LIMIT};
use wctop::{Complex64, CondExp, Error, MeasureSpace, Mfunc, Partition};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WctStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    DimensionMismatch = 3,
    NoConvergence = 4,
    Numeric = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WctComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for WctComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<WctComplex> for Complex64 {
    fn from(z: WctComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Conditional expectation onto the block-constant functions of a partition.
pub struct WctCondExp {
    ce: CondExp,
}

/// The operator f ↦ w·E(u·f).
pub struct WctOperator {
    ce: CondExp,
    w: Mfunc,
    u: Mfunc,
    op: Operator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WctStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WctStatus::Ok,
        Ok(Err(Failure::Null(arg))) => {
            set_error(format!("null pointer passed as `{arg}`"));
            WctStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            let status = match e {
                Error::Validation { .. } => WctStatus::Validation,
                Error::DimensionMismatch { .. } => WctStatus::DimensionMismatch,
                Error::NoConvergence { .. } => WctStatus::NoConvergence,
                Error::Numeric(_) => WctStatus::Numeric,
            };
            set_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WctStatus::Panic
        }
    }
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

unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    name: &'static str,
) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

fn mfunc(values: &[WctComplex]) -> Mfunc {
    Mfunc::new(values.iter().map(|&z| z.into()).collect())
}

/// Message for the most recent failure on this thread, or null. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wct_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds E from `n` atom masses and a block label per atom (labels 0..k-1, all used).
///
/// # Safety
/// `weights` and `labels` must point to `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wct_condexp_new(
    weights: *const f64,
    labels: *const usize,
    n: usize,
    out: *mut *mut WctCondExp,
) -> WctStatus {
    guard(|| {
        let weights = slice(weights, n, "weights")?;
        let labels = slice(labels, n, "labels")?;
        let space = MeasureSpace::new(weights.to_vec())?;
        let partition = Partition::from_labels(&space, labels)?;
        let ce = CondExp::new(space, partition)?;
        put(out, Box::into_raw(Box::new(WctCondExp { ce })), "out")
    })
}

/// # Safety
/// `ce` must be null or a handle from [`wct_condexp_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn wct_condexp_free(ce: *mut WctCondExp) {
    if !ce.is_null() {
        drop(Box::from_raw(ce));
    }
}

/// # Safety
/// `ce` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wct_condexp_dim(ce: *const WctCondExp) -> usize {
    ce.as_ref().map_or(0, |c| c.ce.dim())
}

/// Writes E(f) to `result`; both arrays hold `n` values.
///
/// # Safety
/// `ce` must be a live handle; `f` readable and `result` writable for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn wct_cond_exp(
    ce: *const WctCondExp,
    f: *const WctComplex,
    n: usize,
    result: *mut WctComplex,
) -> WctStatus {
    guard(|| {
        let ce = &get(ce, "ce")?.ce;
        Error::check_dim(ce.dim(), n)?;
        let f = mfunc(slice(f, n, "f")?);
        let out = slice_mut(result, n, "result")?;
        for (slot, z) in out.iter_mut().zip(ce.apply(&f)?.values()) {
            *slot = (*z).into();
        }
        Ok(())
    })
}

/// Builds M_w E M_u; `w` and `u` hold `n` values each, `n` the dimension of `ce`.
///
/// # Safety
/// `ce` must be a live handle; `w`, `u` readable for `n` elements; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wct_operator_new(
    ce: *const WctCondExp,
    w: *const WctComplex,
    u: *const WctComplex,
    n: usize,
    out: *mut *mut WctOperator,
) -> WctStatus {
    guard(|| {
        let ce = get(ce, "ce")?.ce.clone();
        Error::check_dim(ce.dim(), n)?;
        let w = mfunc(slice(w, n, "w")?).on(ce.space())?;
        let u = mfunc(slice(u, n, "u")?).on(ce.space())?;
        let op = Operator::wct(&ce, &w, &u, DENSE_LIMIT)?;
        put(
            out,
            Box::into_raw(Box::new(WctOperator { ce, w, u, op })),
            "out",
        )
    })
}

/// # Safety
/// `op` must be null or a handle from [`wct_operator_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn wct_operator_free(op: *mut WctOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `op` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wct_operator_dim(op: *const WctOperator) -> usize {
    op.as_ref().map_or(0, |o| o.op.dim())
}

/// Writes the n×n matrix of T in the orthonormal atom basis, row-major, into `result`
/// (`len` must equal n·n).
///
/// # Safety
/// `op` must be a live handle; `result` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn wct_operator_matrix(
    op: *const WctOperator,
    result: *mut WctComplex,
    len: usize,
) -> WctStatus {
    guard(|| {
        let o = get(op, "op")?;
        let n = o.op.dim();
        Error::check_dim(n * n, len)?;
        let out = slice_mut(result, len, "result")?;
        let dense = match &o.op {
            Operator::Dense(t) => t.clone(),
            Operator::Compressed(c) => c.expand(),
        };
        for x in 0..n {
            for y in 0..n {
                out[x * n + y] = dense[(x, y)].into();
            }
        }
        Ok(())
    })
}

unsafe fn defect_verdict(
    op: *const WctOperator,
    m: u32,
) -> Result<classify::DefectVerdict, Failure> {
    let o = get(op, "op")?;
    let mut v = classify::classify_operator(&o.op, m, None)?;
    Ok(v.pop().expect("m >= 1 yields a verdict"))
}

/// Operator norm of B_m = Σ (−1)^(m−k) C(m,k) T*^k T^k.
///
/// # Safety
/// `op` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wct_defect_norm(
    op: *const WctOperator,
    m: u32,
    out: *mut f64,
) -> WctStatus {
    guard(|| put(out, defect_verdict(op, m)?.defect_norm, "out"))
}

/// Operator norm of T* B_m T.
///
/// # Safety
/// `op` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wct_quasi_defect_norm(
    op: *const WctOperator,
    m: u32,
    out: *mut f64,
) -> WctStatus {
    guard(|| put(out, defect_verdict(op, m)?.quasi_defect_norm, "out"))
}

/// Whether ‖T*T − TT*‖ ≤ tol·max(1, ‖T‖²).
///
/// # Safety
/// `op` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wct_is_normal(
    op: *const WctOperator,
    tol: f64,
    out: *mut bool,
) -> WctStatus {
    guard(|| {
        let o = get(op, "op")?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::validation("tol", format!("must be positive, got {tol}")).into());
        }
        put(out, classify::normality(&o.op, &[], tol)?.normal, "out")
    })
}

/// Full classification report as a JSON string; release it with [`wct_string_free`].
///
/// # Safety
/// `op` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wct_classify_json(
    op: *const WctOperator,
    m_max: u32,
    rel_tol: f64,
    out: *mut *mut c_char,
) -> WctStatus {
    guard(|| {
        let o = get(op, "op")?;
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(
                Error::validation("rel_tol", format!("must be positive, got {rel_tol}")).into(),
            );
        }
        let report = classify_problem(
            "ffi",
            &o.ce,
            &o.w,
            &o.u,
            m_max,
            rel_tol,
            &classify::DEFAULT_P_PROBES,
        )?;
        let json = serde_json::to_string(&report).map_err(|e| Error::Numeric(e.to_string()))?;
        let c = CString::new(json).map_err(|e| Error::Numeric(e.to_string()))?;
        put(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn wct_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
