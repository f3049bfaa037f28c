//! C ABI over the `replicability` crate.
//!
//! Datasets and reports are opaque handles created and released through this
//! interface. Every fallible call returns a [`ReplStatus`]; on failure the
//! message is available from [`repl_last_error_message`] on the same thread.
//! Strings returned by the library stay valid until the owning handle is
//! freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use replicability::numeric;
use replicability::procedures::{fdr_symmetric, fdr_two_stage, fwer_two_stage, DependenceMode, FwerMethod};
use replicability::selection::{FollowedUp, SelectionRule, Selector};
use replicability::sim;
use replicability::{DiscoveryReport, HypothesisRecord, ReplError, StudyPairData};

/// Status codes. The first five match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplStatus {
    Ok = 0,
    Usage = 1,
    Data = 2,
    Applicability = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplDependence {
    Independent = 0,
    Prds = 1,
    Item1 = 2,
    /// Uses the threshold argument t.
    Item2 = 3,
    /// Uses t when it is positive, otherwise the item-1 primary level.
    Both = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplSelectionKind {
    /// Rows that carry a follow-up p-value.
    Followed = 0,
    /// BH on the primary p-values at `level`.
    Bh = 1,
    /// p1 <= level / m.
    Bonferroni = 2,
    /// The `k` smallest primary p-values.
    TopK = 3,
    /// p1 <= level.
    Threshold = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ReplSelection {
    pub kind: ReplSelectionKind,
    pub level: f64,
    pub k: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplFwerMethod {
    Bonferroni = 0,
    Holm = 1,
}

/// Score of a followed-up hypothesis.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ReplScore {
    /// Row index in insertion order.
    pub index: usize,
    pub z: f64,
    pub adjusted_p: f64,
}

/// Dataset under construction.
pub struct ReplDataset {
    records: Vec<HypothesisRecord>,
    m: Option<usize>,
    r1: Option<usize>,
}

/// Result of a procedure run.
pub struct ReplReport {
    report: DiscoveryReport,
    ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &ReplError) -> ReplStatus {
    match e.exit_code() {
        2 => ReplStatus::Data,
        3 => ReplStatus::Applicability,
        4 => ReplStatus::Io,
        _ => ReplStatus::Usage,
    }
}

fn fail(status: ReplStatus, msg: &str) -> ReplStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), (ReplStatus, String)>) -> ReplStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ReplStatus::Ok,
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(ReplStatus::Panic, "internal panic"),
    }
}

fn lift(e: ReplError) -> (ReplStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (ReplStatus, String) {
    (ReplStatus::NullPointer, "null pointer argument".to_string())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (ReplStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (ReplStatus::Usage, "string is not valid UTF-8".to_string()))
}

fn build(ds: &ReplDataset) -> Result<StudyPairData, (ReplStatus, String)> {
    StudyPairData::try_new(ds.records.clone(), ds.m, ds.r1).map_err(lift)
}

fn dependence(kind: ReplDependence, t: f64) -> DependenceMode {
    match kind {
        ReplDependence::Independent => DependenceMode::Independent,
        ReplDependence::Prds => DependenceMode::PrdsFollowup,
        ReplDependence::Item1 => DependenceMode::ArbitraryPrimaryItem1,
        ReplDependence::Item2 => DependenceMode::ArbitraryPrimaryItem2 { t },
        ReplDependence::Both => DependenceMode::ArbitraryBoth { t: (t > 0.0).then_some(t) },
    }
}

fn selector(sel: &ReplSelection) -> Box<dyn Selector> {
    match sel.kind {
        ReplSelectionKind::Followed => Box::new(FollowedUp),
        ReplSelectionKind::Bh => Box::new(SelectionRule::BhAtLevel(sel.level)),
        ReplSelectionKind::Bonferroni => Box::new(SelectionRule::BonferroniThreshold(sel.level)),
        ReplSelectionKind::TopK => Box::new(SelectionRule::TopK(sel.k)),
        ReplSelectionKind::Threshold => Box::new(SelectionRule::FixedThreshold(sel.level)),
    }
}

unsafe fn emit(report: DiscoveryReport, out: *mut *mut ReplReport) {
    let ids = report
        .rejected_ids
        .iter()
        .map(|s| CString::new(s.as_str()).unwrap_or_default())
        .collect();
    *out = Box::into_raw(Box::new(ReplReport { report, ids }));
}

/// Message of the last failed call on this thread; empty if none.
#[no_mangle]
pub extern "C" fn repl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn repl_dataset_new() -> *mut ReplDataset {
    Box::into_raw(Box::new(ReplDataset { records: Vec::new(), m: None, r1: None }))
}

/// Appends a row. `p2` is ignored unless `has_p2` is true.
///
/// # Safety
/// `ds` must come from this library and `id` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn repl_dataset_push(
    ds: *mut ReplDataset,
    id: *const c_char,
    p1: f64,
    p2: f64,
    has_p2: bool,
) -> ReplStatus {
    guard(|| {
        let ds = ds.as_mut().ok_or_else(null)?;
        let id = read_str(id)?;
        ds.records.push(HypothesisRecord::new(id, p1, has_p2.then_some(p2)));
        Ok(())
    })
}

/// Declares the family size m; 0 clears it.
///
/// # Safety
/// `ds` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_dataset_set_m(ds: *mut ReplDataset, m: usize) -> ReplStatus {
    guard(|| {
        ds.as_mut().ok_or_else(null)?.m = (m > 0).then_some(m);
        Ok(())
    })
}

/// Declares the follow-up set size R1; 0 clears it.
///
/// # Safety
/// `ds` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_dataset_set_r1(ds: *mut ReplDataset, r1: usize) -> ReplStatus {
    guard(|| {
        ds.as_mut().ok_or_else(null)?.r1 = (r1 > 0).then_some(r1);
        Ok(())
    })
}

/// Reads a CSV file with header id,p1,p2.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn repl_dataset_from_csv(path: *const c_char, out: *mut *mut ReplDataset) -> ReplStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let d = replicability::io::parse_pvalue_csv(read_str(path)?).map_err(lift)?;
        *out = Box::into_raw(Box::new(ReplDataset {
            records: d.records().to_vec(),
            m: d.m_declared(),
            r1: d.r1_declared(),
        }));
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_dataset_len(ds: *const ReplDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.records.len())
}

/// # Safety
/// `ds` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn repl_dataset_free(ds: *mut ReplDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Two-stage FDR procedure at (q1, q).
///
/// # Safety
/// `ds` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_fdr_two_stage(
    ds: *const ReplDataset,
    selection: ReplSelection,
    q1: f64,
    q: f64,
    dep: ReplDependence,
    t: f64,
    out: *mut *mut ReplReport,
) -> ReplStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let data = build(ds)?;
        let r = fdr_two_stage(&data, selector(&selection).as_ref(), q1, q, dependence(dep, t)).map_err(lift)?;
        emit(r, out);
        Ok(())
    })
}

/// Two-stage FWER procedure at (alpha1, alpha).
///
/// # Safety
/// `ds` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_fwer_two_stage(
    ds: *const ReplDataset,
    selection: ReplSelection,
    alpha1: f64,
    alpha: f64,
    method: ReplFwerMethod,
    out: *mut *mut ReplReport,
) -> ReplStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let data = build(ds)?;
        let method = match method {
            ReplFwerMethod::Bonferroni => FwerMethod::Bonferroni,
            ReplFwerMethod::Holm => FwerMethod::Holm,
        };
        let r = fwer_two_stage(&data, selector(&selection).as_ref(), alpha1, alpha, method).map_err(lift)?;
        emit(r, out);
        Ok(())
    })
}

/// Symmetric procedure: study one as primary at weight w1, the reverse at
/// 1 - w1. `selection2` selects on study-two p-values.
///
/// # Safety
/// `ds` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_fdr_symmetric(
    ds: *const ReplDataset,
    selection1: ReplSelection,
    selection2: ReplSelection,
    w1: f64,
    q1: f64,
    q: f64,
    out: *mut *mut ReplReport,
) -> ReplStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let data = build(ds)?;
        let (s1, s2) = (selector(&selection1), selector(&selection2));
        let r = fdr_symmetric(&data, s1.as_ref(), s2.as_ref(), w1, q1, q, DependenceMode::Independent)
            .map_err(lift)?;
        emit(r, out);
        Ok(())
    })
}

/// Follow-up set size R1.
///
/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_report_r1(r: *const ReplReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.r1)
}

/// Number of rejections R2.
///
/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_report_r2(r: *const ReplReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.r2)
}

/// Id of the i-th rejection in input order, or null when out of range.
///
/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_report_rejected_id(r: *const ReplReport, i: usize) -> *const c_char {
    r.as_ref()
        .and_then(|r| r.ids.get(i))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Row index of the i-th rejection, or `usize::MAX` when out of range.
///
/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_report_rejected_index(r: *const ReplReport, i: usize) -> usize {
    r.as_ref()
        .and_then(|r| r.report.rejected.get(i).copied())
        .unwrap_or(usize::MAX)
}

/// Number of scored hypotheses.
///
/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn repl_report_score_count(r: *const ReplReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.per_hypothesis.len())
}

/// # Safety
/// `r` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_report_score(r: *const ReplReport, i: usize, out: *mut ReplScore) -> ReplStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let s = r
            .report
            .per_hypothesis
            .get(i)
            .ok_or_else(|| (ReplStatus::Usage, format!("score index {i} out of range")))?;
        *out = ReplScore { index: s.index, z: s.z, adjusted_p: s.adjusted_p };
        Ok(())
    })
}

/// # Safety
/// `r` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn repl_report_free(r: *mut ReplReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub extern "C" fn repl_std_normal_cdf(x: f64) -> f64 {
    numeric::std_normal_cdf(x)
}

#[no_mangle]
pub extern "C" fn repl_std_normal_sf(x: f64) -> f64 {
    numeric::std_normal_sf(x)
}

unsafe fn write_f64(out: *mut f64, f: impl FnOnce() -> replicability::Result<f64>) -> ReplStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(null)?;
        *out = f().map_err(lift)?;
        Ok(())
    })
}

/// Upper-tail quantile: z with 1 - Φ(z) = p.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_std_normal_isf(p: f64, out: *mut f64) -> ReplStatus {
    write_f64(out, || numeric::std_normal_isf(p))
}

/// Harmonic number H_k.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_harmonic(k: usize, out: *mut f64) -> ReplStatus {
    write_f64(out, || numeric::harmonic(k))
}

/// Oracle primary level q' for null fractions f00, f01.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_oracle_qprime(f00: f64, f01: f64, q: f64, w1: f64, out: *mut f64) -> ReplStatus {
    write_f64(out, || numeric::solve_oracle_qprime(f00, f01, q, w1))
}

/// Power of Bonferroni on max(p1, p2) for one non-null pair.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_power_bonf_max(mu11: f64, mu21: f64, m: usize, alpha: f64, out: *mut f64) -> ReplStatus {
    write_f64(out, || sim::analytic_power_bonf_max(mu11, mu21, m, alpha))
}

/// Power of the two-stage Bonferroni procedure for one non-null pair.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn repl_power_two_stage(
    mu11: f64,
    mu21: f64,
    m: usize,
    alpha1: f64,
    alpha: f64,
    out: *mut f64,
) -> ReplStatus {
    write_f64(out, || sim::analytic_power_two_stage(mu11, mu21, m, alpha1, alpha))
}
