//! C ABI for the propmeter library.
//!
//! Elections are opaque handles created from BLT text; every function
//! returns a [`PropStatus`] code and writes results through out-pointers.
//! The last error message is kept per thread and retrievable with
//! [`propmeter_last_error`]. Handles must be freed with
//! [`propmeter_election_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::ptr;

use propmeter::measures::{MeasureContext, PriceMode, PricePath};
use propmeter::model::{Committee, Election};
use propmeter::optimizer::optimal_psc;
use propmeter::rules::{run_rule, RuleId, TieBreakPolicy};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Failed = 5,
}

/// Voting rules, numbered for the C ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropRule {
    ScottishStv = 0,
    MeekStv = 1,
    Ear = 2,
    Sntv = 3,
    SeqRcv = 4,
}

/// Proportionality measures, numbered for the C ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropMeasure {
    Psc = 0,
    EjrPlus = 1,
    LocalStability = 2,
    Priceability = 3,
}

/// Opaque election handle.
pub struct PropElection {
    election: Election,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).unwrap_or_default();
    });
}

fn fail(status: PropStatus, message: impl Into<String>) -> PropStatus {
    set_error(message);
    status
}

/// Returns the last error message for this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn propmeter_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses BLT text into an election handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn propmeter_election_parse_blt(
    text: *const c_char,
    out: *mut *mut PropElection,
) -> PropStatus {
    if text.is_null() || out.is_null() {
        return fail(PropStatus::NullArgument, "null argument");
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(e) => return fail(PropStatus::InvalidUtf8, format!("ballot text: {e}")),
    };
    match propmeter::formats::parse_blt(text) {
        Ok(election) => {
            *out = Box::into_raw(Box::new(PropElection { election }));
            PropStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(PropStatus::ParseError, e.to_string())
        }
    }
}

/// Frees an election handle. A null handle is a no-op.
///
/// # Safety
/// `handle` must be a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn propmeter_election_free(handle: *mut PropElection) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Writes candidate count, committee size, and voter count.
///
/// # Safety
/// All pointers must be valid; `handle` must be a live election handle.
#[no_mangle]
pub unsafe extern "C" fn propmeter_election_info(
    handle: *const PropElection,
    candidates: *mut usize,
    seats: *mut usize,
    voters: *mut u64,
) -> PropStatus {
    if handle.is_null() || candidates.is_null() || seats.is_null() || voters.is_null() {
        return fail(PropStatus::NullArgument, "null argument");
    }
    let e = &(*handle).election;
    *candidates = e.num_candidates();
    *seats = e.seats();
    *voters = e.total_voters();
    PropStatus::Ok
}

/// Runs a voting rule with lexicographic tie-breaking and writes the winning
/// committee (1-based candidate indices, ascending) into `committee`, which
/// must hold at least `seats` entries.
///
/// # Safety
/// `handle` must be live and `committee` must point to `seats` writable
/// elements.
#[no_mangle]
pub unsafe extern "C" fn propmeter_rule_committee(
    handle: *const PropElection,
    rule: PropRule,
    committee: *mut usize,
) -> PropStatus {
    if handle.is_null() || committee.is_null() {
        return fail(PropStatus::NullArgument, "null argument");
    }
    let e = &(*handle).election;
    let rule = match rule {
        PropRule::ScottishStv => RuleId::Sstv,
        PropRule::MeekStv => RuleId::Meek,
        PropRule::Ear => RuleId::Ear,
        PropRule::Sntv => RuleId::Sntv,
        PropRule::SeqRcv => RuleId::SeqRcv,
    };
    let (w, _) = run_rule(e, rule, TieBreakPolicy::Lexicographic);
    for (i, &c) in w.members().iter().enumerate() {
        *committee.add(i) = c;
    }
    PropStatus::Ok
}

/// Computes one measure's alpha value for a committee of `len` candidate
/// indices. Writes the value as a double plus a fraction; `*exact` reports
/// whether the fraction is exact (priceability may fall back to a float
/// solve on large instances).
///
/// # Safety
/// `handle` must be live; `committee` must point to `len` readable entries;
/// the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn propmeter_measure_alpha(
    handle: *const PropElection,
    committee: *const usize,
    len: usize,
    measure: PropMeasure,
    alpha: *mut c_double,
    numerator: *mut i64,
    denominator: *mut i64,
    exact: *mut bool,
) -> PropStatus {
    if handle.is_null()
        || committee.is_null()
        || alpha.is_null()
        || numerator.is_null()
        || denominator.is_null()
        || exact.is_null()
    {
        return fail(PropStatus::NullArgument, "null argument");
    }
    let e = &(*handle).election;
    if len != e.seats() {
        return fail(
            PropStatus::InvalidArgument,
            format!("committee has {len} members, the instance needs {}", e.seats()),
        );
    }
    let members = std::slice::from_raw_parts(committee, len);
    let w = match Committee::new(members.iter().copied(), e.num_candidates()) {
        Ok(w) => w,
        Err(e) => return fail(PropStatus::InvalidArgument, e.to_string()),
    };
    let ctx = MeasureContext::new(e);
    let (value, is_exact) = match measure {
        PropMeasure::Psc => (ctx.psc_value(&w).0, true),
        PropMeasure::EjrPlus => (ctx.ejr_plus_value(&w).0, true),
        PropMeasure::LocalStability => (ctx.local_stability_value(&w).0, true),
        PropMeasure::Priceability => {
            let report = propmeter::measures::price::priceability_value(
                e,
                &w,
                PriceMode::default(),
                PricePath::Auto,
            );
            (report.alpha, report.exact)
        }
    };
    *alpha = *value.numer() as f64 / *value.denom() as f64;
    *numerator = *value.numer();
    *denominator = *value.denom();
    *exact = is_exact;
    PropStatus::Ok
}

/// Computes the instance-optimal PSC value and its witness committee
/// (`seats` entries).
///
/// # Safety
/// `handle` must be live; out-pointers must be valid; `witness` must point
/// to `seats` writable elements.
#[no_mangle]
pub unsafe extern "C" fn propmeter_optimal_psc(
    handle: *const PropElection,
    alpha: *mut c_double,
    numerator: *mut i64,
    denominator: *mut i64,
    witness: *mut usize,
) -> PropStatus {
    if handle.is_null()
        || alpha.is_null()
        || numerator.is_null()
        || denominator.is_null()
        || witness.is_null()
    {
        return fail(PropStatus::NullArgument, "null argument");
    }
    let e = &(*handle).election;
    match optimal_psc(e) {
        Ok(report) => {
            *alpha = *report.alpha.numer() as f64 / *report.alpha.denom() as f64;
            *numerator = *report.alpha.numer();
            *denominator = *report.alpha.denom();
            for (i, &c) in report.witness.members().iter().enumerate() {
                *witness.add(i) = c;
            }
            PropStatus::Ok
        }
        Err(e) => fail(PropStatus::Failed, e.to_string()),
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn propmeter_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
