//! C ABI over the `ocus` library.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_from_*` function and released by the matching `*_free`. Every
//! fallible call returns an [`OcusStatus`]; on failure the message is
//! available from [`ocus_last_error`] until the next failing call on the
//! same thread. Strings handed out by the library are freed with
//! [`ocus_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::{Duration, Instant};

use ocus::explain::{explain_full_with, ExplainOptions, ExplanationSequence, SequenceDocument};
use ocus::ocus::{hitting_set_for, ocus as solve_ocus};
use ocus::puzzle::read_problem;
use ocus::{
    verify_sequence, Clause, ClauseGroup, CnfFormula, Error, ExplanationProblem, IndexSet, Literal, MetaConstraint,
    OcusResult, PolarityHint, SatSubsetCache, SequenceConfig,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OcusStatus {
    Ok = 0,
    /// No unsatisfiable subset satisfies the constraint.
    NoneExists = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    /// Malformed input document or label.
    Parse = 4,
    /// The sequence does not pass verification.
    InvalidSequence = 5,
    /// The output buffer is too small; the needed length was still written.
    BufferTooSmall = 6,
    Timeout = 7,
    Internal = 8,
    /// A panic was caught at the boundary.
    Panic = 9,
}

/// An explanation problem.
pub struct OcusProblem {
    inner: ExplanationProblem,
}

/// A generated explanation sequence, together with its configuration label.
pub struct OcusSequence {
    inner: ExplanationSequence,
    document: SequenceDocument,
}

/// A weighted CNF formula under construction.
pub struct OcusFormula {
    inner: CnfFormula,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: OcusStatus, message: impl Into<String>) -> OcusStatus {
    set_error(message.into());
    status
}

fn status_of(e: &Error) -> OcusStatus {
    match e {
        Error::Parse { .. } | Error::Schema(_) | Error::Json(_) => OcusStatus::Parse,
        Error::Timeout => OcusStatus::Timeout,
        Error::Internal(_) => OcusStatus::Internal,
        _ => OcusStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> OcusStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into [`OcusStatus::Panic`].
fn guard(f: impl FnOnce() -> OcusStatus) -> OcusStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(OcusStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, OcusStatus> {
    if p.is_null() {
        return Err(fail(OcusStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(OcusStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs removed").into_raw()
}

/// The message of the last failing call on this thread, or null. Owned by the
/// library; valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ocus_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ocus_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a problem document or logic-grid puzzle from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ocus_problem_from_json(json: *const c_char, out: *mut *mut OcusProblem) -> OcusStatus {
    guard(|| {
        if out.is_null() {
            return fail(OcusStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match read_problem(text.as_bytes()) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(OcusProblem { inner: p }));
                OcusStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `problem` must be null or come from [`ocus_problem_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ocus_problem_free(problem: *mut OcusProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of atoms of the problem, or 0 for null.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ocus_problem_atom_count(problem: *const OcusProblem) -> u32 {
    problem.as_ref().map_or(0, |p| p.inner.atom_count())
}

/// Number of literals still to be explained, or 0 for null.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ocus_problem_remaining(problem: *const OcusProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.target().len() - p.inner.initial().len())
}

/// Explains the whole problem under `config` (for example
/// `"ocus+shared@max:actual:unif"` or `"mus"`). A `timeout_ms` of 0 means no limit.
///
/// # Safety
/// `problem` must be a live handle, `config` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ocus_problem_explain(
    problem: *const OcusProblem,
    config: *const c_char,
    timeout_ms: u64,
    out: *mut *mut OcusSequence,
) -> OcusStatus {
    guard(|| {
        if out.is_null() {
            return fail(OcusStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(problem) = problem.as_ref() else {
            return fail(OcusStatus::NullPointer, "problem is null");
        };
        let label = match str_arg(config, "config") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config: SequenceConfig = match label.parse() {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        let deadline = (timeout_ms > 0).then(|| Instant::now() + Duration::from_millis(timeout_ms));
        match explain_full_with(&problem.inner, config, ExplainOptions { deadline }) {
            Ok(seq) => {
                let document = SequenceDocument::new(&problem.inner, &config, &seq);
                *out = Box::into_raw(Box::new(OcusSequence { inner: seq, document }));
                OcusStatus::Ok
            }
            Err(e) => from_error(e.error),
        }
    })
}

/// # Safety
/// `seq` must be null or come from [`ocus_problem_explain`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ocus_sequence_free(seq: *mut OcusSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Number of steps, or 0 for null.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ocus_sequence_len(seq: *const OcusSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.steps.len())
}

/// Summed step costs, or 0 for null.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ocus_sequence_total_cost(seq: *const OcusSequence) -> u64 {
    seq.as_ref().map_or(0, |s| s.inner.total_cost())
}

/// Cost of step `index`.
///
/// # Safety
/// `seq` must be a live handle and `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn ocus_sequence_step_cost(seq: *const OcusSequence, index: usize, cost: *mut u64) -> OcusStatus {
    guard(|| {
        let (Some(seq), false) = (seq.as_ref(), cost.is_null()) else {
            return fail(OcusStatus::NullPointer, "seq or cost is null");
        };
        match seq.inner.steps.get(index) {
            Some(s) => {
                *cost = s.cost;
                OcusStatus::Ok
            }
            None => fail(OcusStatus::InvalidArgument, format!("step {index} of {}", seq.inner.steps.len())),
        }
    })
}

/// The sequence document as JSON; free with [`ocus_string_free`]. Null on failure.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ocus_sequence_to_json(seq: *const OcusSequence) -> *mut c_char {
    match seq.as_ref() {
        Some(s) => into_c_string(serde_json::to_string_pretty(&s.document).expect("documents serialize")),
        None => {
            set_error("seq is null".into());
            ptr::null_mut()
        }
    }
}

/// Re-checks `seq` against `problem`: [`OcusStatus::Ok`] if every step is
/// entailed, uses only known facts and the sequence derives the whole target.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn ocus_sequence_verify(problem: *const OcusProblem, seq: *const OcusSequence) -> OcusStatus {
    guard(|| {
        let (Some(problem), Some(seq)) = (problem.as_ref(), seq.as_ref()) else {
            return fail(OcusStatus::NullPointer, "problem or seq is null");
        };
        match verify_sequence(&problem.inner, &seq.inner.steps).violation {
            None => OcusStatus::Ok,
            Some(v) => fail(OcusStatus::InvalidSequence, v.to_string()),
        }
    })
}

/// An empty formula over atoms `1..=atom_count`.
#[no_mangle]
pub extern "C" fn ocus_formula_new(atom_count: u32) -> *mut OcusFormula {
    Box::into_raw(Box::new(OcusFormula { inner: CnfFormula::new(atom_count) }))
}

/// # Safety
/// `formula` must be null or come from [`ocus_formula_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ocus_formula_free(formula: *mut OcusFormula) {
    if !formula.is_null() {
        drop(Box::from_raw(formula));
    }
}

/// Number of clauses, or 0 for null.
///
/// # Safety
/// `formula` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ocus_formula_len(formula: *const OcusFormula) -> usize {
    formula.as_ref().map_or(0, |f| f.inner.len())
}

/// Appends a clause of DIMACS literals with a positive weight.
///
/// # Safety
/// `formula` must be a live handle; `lits` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn ocus_formula_add_clause(
    formula: *mut OcusFormula,
    lits: *const i32,
    len: usize,
    weight: u64,
) -> OcusStatus {
    guard(|| {
        let Some(f) = formula.as_mut() else {
            return fail(OcusStatus::NullPointer, "formula is null");
        };
        if lits.is_null() && len > 0 {
            return fail(OcusStatus::NullPointer, "lits is null");
        }
        if weight == 0 {
            return fail(OcusStatus::InvalidArgument, "weights must be positive");
        }
        let values = if len == 0 { &[][..] } else { std::slice::from_raw_parts(lits, len) };
        let mut clause = Vec::with_capacity(len);
        for &v in values {
            match Literal::from_dimacs(v) {
                Some(l) => clause.push(l),
                None => return fail(OcusStatus::InvalidArgument, format!("invalid literal {v}")),
            }
        }
        let atoms = f.inner.atom_count();
        if let Some(l) = clause.iter().find(|l| l.atom() > atoms) {
            return fail(OcusStatus::InvalidArgument, format!("literal {l} exceeds {atoms} atoms"));
        }
        match Clause::new(clause) {
            Ok(c) => {
                f.inner.push(c, weight, ClauseGroup::PuzzleSpecific);
                OcusStatus::Ok
            }
            Err(l) => fail(OcusStatus::InvalidArgument, format!("tautology on atom {}", l.atom())),
        }
    })
}

/// Computes a cheapest unsatisfiable subset of `formula` holding exactly one
/// of the `domain_len` clause indices in `domain` (no constraint if
/// `domain_len` is 0). `grow` is a label such as `"max:actual:unif"`.
///
/// On [`OcusStatus::Ok`] the sorted 0-based indices go to `subset` (capacity
/// `capacity`), their number to `subset_len` and the cost to `cost`. If the
/// buffer is too small, `subset_len` still receives the needed length.
///
/// # Safety
/// `formula` must be a live handle, `grow` NUL-terminated, `domain` valid for
/// `domain_len` reads, `subset` valid for `capacity` writes, and
/// `subset_len` and `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn ocus_formula_solve(
    formula: *const OcusFormula,
    domain: *const usize,
    domain_len: usize,
    grow: *const c_char,
    subset: *mut usize,
    capacity: usize,
    subset_len: *mut usize,
    cost: *mut u64,
) -> OcusStatus {
    guard(|| {
        let Some(f) = formula.as_ref() else {
            return fail(OcusStatus::NullPointer, "formula is null");
        };
        if subset_len.is_null() || cost.is_null() || (subset.is_null() && capacity > 0) {
            return fail(OcusStatus::NullPointer, "output pointer is null");
        }
        if domain.is_null() && domain_len > 0 {
            return fail(OcusStatus::NullPointer, "domain is null");
        }
        let grow = match str_arg(grow, "grow").map(ocus::explain::parse_grow_label) {
            Ok(Ok(g)) => g,
            Ok(Err(e)) => return from_error(e),
            Err(s) => return s,
        };
        let constraint = if domain_len == 0 {
            MetaConstraint::TriviallyTrue
        } else {
            let d: IndexSet = std::slice::from_raw_parts(domain, domain_len).iter().copied().collect();
            if let Some(m) = d.max_index().filter(|&m| m >= f.inner.len()) {
                return fail(OcusStatus::InvalidArgument, format!("domain index {m} out of range"));
            }
            MetaConstraint::ExactlyOne(d)
        };
        let result = hitting_set_for(&f.inner, constraint.clone()).and_then(|mut hs| {
            let mut cache = SatSubsetCache::new();
            solve_ocus(&f.inner, &constraint, grow, &mut hs, &mut cache, &PolarityHint::none())
        });
        match result {
            Ok(OcusResult::Found { subset: s, cost: c }) => {
                *subset_len = s.len();
                *cost = c;
                if s.len() > capacity {
                    return fail(OcusStatus::BufferTooSmall, format!("need room for {} indices", s.len()));
                }
                for (k, i) in s.iter().enumerate() {
                    *subset.add(k) = i;
                }
                OcusStatus::Ok
            }
            Ok(OcusResult::NoneExists) => {
                fail(OcusStatus::NoneExists, "no unsatisfiable subset satisfies the constraint")
            }
            Ok(OcusResult::ExceedsBound) => fail(OcusStatus::Internal, "unbounded search reported a bound"),
            Err(e) => from_error(e),
        }
    })
}
