//! C ABI over `confstab`. Every function returns a [`CsStatus`]; results go
//! through out-pointers. Strings handed out are NUL-terminated UTF-8 and must
//! be released with [`cs_string_free`]. After a failure, [`cs_last_error`]
//! describes it until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use confstab::basis::{dim, dim_table};
use confstab::browder::{check_point_bracket, class_expr, Ambient, Verdict};
use confstab::stability::{cone_dim, d_constant, verify_iso_range};
use confstab::words::{verify_word_ranges, Strictness};
use confstab::{Error, GeneratorSet, Prime};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    /// The check ran and found a violation or could not certify the claim.
    Violation = 1,
    NullPointer = 2,
    NotPrime = 3,
    Domain = 4,
    Overflow = 5,
    Parse = 6,
    InvalidUtf8 = 7,
    Panic = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsVerdict {
    Vanishes = 0,
    NormalForm = 1,
    Unknown = 2,
}

/// Opaque handle: the generator family for a prime and ambient dimension.
pub struct CsAlgebra {
    set: GeneratorSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotPrime(_) => CsStatus::NotPrime,
            Error::Overflow(_) => CsStatus::Overflow,
            Error::Parse { .. } => CsStatus::Parse,
            Error::Domain(_) | Error::MixedGeneratorSets(..) => CsStatus::Domain,
            Error::RuleMismatch { .. } | Error::BadPosition(_) => CsStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CsStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: Option<String>) {
    let msg = msg.map(|m| CString::new(m.replace('\0', " ")).unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

/// Runs `f`, recording the failure message and containing panics.
fn guard(f: impl FnOnce() -> Result<CsStatus, Failure>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            set_error(None);
            status
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("panic inside confstab".into()));
            CsStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(CsStatus::Internal, "output contains NUL".into()))?;
    write(out, c.into_raw(), "string out-pointer")
}

unsafe fn algebra<'a>(h: *const CsAlgebra) -> Result<&'a CsAlgebra, Failure> {
    h.as_ref().ok_or_else(|| null("algebra handle"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(CsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn json<T: serde::Serialize + ?Sized>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure(CsStatus::Internal, e.to_string()))
}

fn passed(ok: bool) -> CsStatus {
    if ok {
        CsStatus::Ok
    } else {
        CsStatus::Violation
    }
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates the generator family for `(p, n)`: the plane for `n = 2`, the
/// higher-dimensional family for `p = 2, n > 2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_algebra_new(p: u64, n: u32, out: *mut *mut CsAlgebra) -> CsStatus {
    guard(|| {
        let set = GeneratorSet::for_params(Prime::new(p)?, n)?;
        write(out, Box::into_raw(Box::new(CsAlgebra { set })), "out")?;
        Ok(CsStatus::Ok)
    })
}

/// # Safety
/// `h` must come from [`cs_algebra_new`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_algebra_free(h: *mut CsAlgebra) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the basis in bidegree `(i, k)`.
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_dim(h: *const CsAlgebra, i: u32, k: u32, out: *mut u64) -> CsStatus {
    guard(|| {
        write(out, dim(&algebra(h)?.set, i, k)?, "out")?;
        Ok(CsStatus::Ok)
    })
}

/// Dimension of the order-m cone homology in bidegree `(i, k)`.
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_cone_dim(h: *const CsAlgebra, m: u32, i: u32, k: u32, out: *mut u64) -> CsStatus {
    guard(|| {
        write(out, cone_dim(&algebra(h)?.set, m, i, k)?, "out")?;
        Ok(CsStatus::Ok)
    })
}

/// Dimension table for `0 ≤ i ≤ max_deg`, `0 ≤ k ≤ max_par` as JSON.
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_dim_table_json(
    h: *const CsAlgebra,
    max_deg: u32,
    max_par: u32,
    out: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        let table = dim_table(&algebra(h)?.set, max_deg, max_par)?;
        write_string(out, table.to_json().to_string())?;
        Ok(CsStatus::Ok)
    })
}

/// The range constant `D(p, m, k)` as a reduced fraction.
///
/// # Safety
/// `num` and `den` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_d_constant(p: u64, m: u32, k: i64, num: *mut i64, den: *mut i64) -> CsStatus {
    guard(|| {
        let d = d_constant(Prime::new(p)?, m, k)?;
        let narrow = |x: i128| i64::try_from(x).map_err(|_| Failure(CsStatus::Overflow, "D does not fit in i64".into()));
        write(num, narrow(*d.numer())?, "num")?;
        write(den, narrow(*d.denom())?, "den")?;
        Ok(CsStatus::Ok)
    })
}

/// Checks the order-m stable range for `k ≤ k_max`. Returns `Violation` when
/// the check fails; the JSON report is written either way.
///
/// # Safety
/// `h` must be a live handle and `report` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_verify_iso_range(
    h: *const CsAlgebra,
    m: u32,
    k_max: u32,
    report: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        let r = verify_iso_range(&algebra(h)?.set, m, k_max)?;
        write_string(report, json(&r)?)?;
        Ok(passed(r.passed()))
    })
}

/// Attempts to certify `[z, e] = 0` for a named class (`e`, `x2`, `z0`,
/// `w1`, `e^3`, ...). Writes the verdict and the JSONL proof trace.
///
/// # Safety
/// `class` must be a NUL-terminated string; `verdict` and `trace` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_bracket_check(
    n: u32,
    p: u64,
    class: *const c_char,
    verdict: *mut CsVerdict,
    trace: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        let amb = Ambient::new(n, Prime::new(p)?)?;
        let z = class_expr(read_str(class, "class")?)?;
        let t = check_point_bracket(&amb, &z)?;
        let v = match t.verdict {
            Verdict::Vanishes => CsVerdict::Vanishes,
            Verdict::NormalForm(_) => CsVerdict::NormalForm,
            Verdict::Unknown => CsVerdict::Unknown,
        };
        write(verdict, v, "verdict")?;
        write_string(trace, t.to_jsonl())?;
        Ok(CsStatus::Ok)
    })
}

/// Checks that every non-ideal monomial in Dyer–Lashof words on `e` lies in
/// the order-m unstable range, for parity up to `max_par`.
///
/// # Safety
/// `report` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_words_verify(
    n: u32,
    m: u32,
    max_par: u32,
    strict: bool,
    report: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        let strictness = if strict { Strictness::Above } else { Strictness::AtLeast };
        let r = verify_word_ranges(n, m, max_par, strictness)?;
        write_string(report, json(&r)?)?;
        Ok(passed(r.passed()))
    })
}
