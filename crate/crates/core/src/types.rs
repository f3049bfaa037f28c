//! Domain types shared across the crate.
//!
//! Every analysis starts from a [`StudyPairData`]: one row per elementary
//! hypothesis carrying its primary-study p-value and, when the hypothesis was
//! followed up, its follow-up p-value. Rows keep their input order; every set
//! the crate reports is sorted by that order.

use std::collections::HashSet;
use std::fmt;

use crate::error::{ReplError, Result};

/// One elementary hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRecord {
    pub id: String,
    /// Primary-study p-value.
    pub p1: f64,
    /// Follow-up p-value; `None` when the hypothesis was not followed up.
    pub p2: Option<f64>,
}

impl HypothesisRecord {
    pub fn new(id: impl Into<String>, p1: f64, p2: Option<f64>) -> Self {
        Self {
            id: id.into(),
            p1,
            p2,
        }
    }
}

/// A family of hypotheses tested in a primary and a follow-up study.
///
/// `m_declared` and `r1_declared` let a published partial table stand in for
/// the full family: the family size and the follow-up set size used by the
/// thresholds can exceed the number of listed rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyPairData {
    records: Vec<HypothesisRecord>,
    m_declared: Option<usize>,
    r1_declared: Option<usize>,
}

impl StudyPairData {
    /// Builds a dataset without checking it. Use [`StudyPairData::try_new`]
    /// or [`validate_dataset`] to check the invariants.
    pub fn new(
        records: Vec<HypothesisRecord>,
        m_declared: Option<usize>,
        r1_declared: Option<usize>,
    ) -> Self {
        Self {
            records,
            m_declared,
            r1_declared,
        }
    }

    /// Builds a dataset and rejects it if any invariant is violated.
    pub fn try_new(
        records: Vec<HypothesisRecord>,
        m_declared: Option<usize>,
        r1_declared: Option<usize>,
    ) -> Result<Self> {
        let data = Self::new(records, m_declared, r1_declared);
        data.ensure_valid()?;
        Ok(data)
    }

    /// Complete data (both p-values for every row), no overrides.
    pub fn from_pairs<I, S>(rows: I) -> Self
    where
        I: IntoIterator<Item = (S, f64, f64)>,
        S: Into<String>,
    {
        let records = rows
            .into_iter()
            .map(|(id, p1, p2)| HypothesisRecord::new(id, p1, Some(p2)))
            .collect();
        Self::new(records, None, None)
    }

    pub fn records(&self) -> &[HypothesisRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn m_declared(&self) -> Option<usize> {
        self.m_declared
    }

    pub fn r1_declared(&self) -> Option<usize> {
        self.r1_declared
    }

    /// Family size m used by the procedures.
    pub fn m(&self) -> usize {
        self.m_declared.unwrap_or(self.records.len())
    }

    /// Number of rows with a follow-up p-value.
    pub fn followed_up_count(&self) -> usize {
        self.records.iter().filter(|r| r.p2.is_some()).count()
    }

    /// Follow-up set size R1 when the follow-up set is "every row with p2".
    pub fn r1(&self) -> usize {
        self.r1_declared.unwrap_or_else(|| self.followed_up_count())
    }

    /// Indices of rows with a follow-up p-value, in input order.
    pub fn followed_up_indices(&self) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.p2.map(|_| i))
            .collect()
    }

    pub fn p1_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p1).collect()
    }

    pub fn p2_values(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.p2).collect()
    }

    pub fn ids_of(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&i| self.records[i].id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.records.iter().position(|r| r.id == id)
    }

    /// Same hypotheses with the two studies' roles exchanged. Requires
    /// complete data.
    pub fn swapped(&self) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| match r.p2 {
                Some(p2) => Ok(HypothesisRecord::new(r.id.clone(), p2, Some(r.p1))),
                None => Err(ReplError::Data(format!(
                    "hypothesis {:?} has no follow-up p-value; both studies are required",
                    r.id
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(records, self.m_declared, None))
    }

    /// Fails with a data error unless every row carries both p-values.
    pub fn require_complete(&self) -> Result<()> {
        match self.records.iter().find(|r| r.p2.is_none()) {
            Some(r) => Err(ReplError::Data(format!(
                "hypothesis {:?} has no follow-up p-value; this procedure needs complete data",
                r.id
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let violations = validate_dataset(self);
        if violations.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
            Err(ReplError::Data(msgs.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    P1OutOfRange,
    P2OutOfRange,
    EmptyId,
    DuplicateId,
    DeclaredMTooSmall,
    DeclaredR1TooSmall,
    DeclaredR1ExceedsM,
}

/// A single invariant violation found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending row, when the violation is row-level.
    pub row: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::P1OutOfRange => "p1 out of range",
            ViolationKind::P2OutOfRange => "p2 out of range",
            ViolationKind::EmptyId => "empty id",
            ViolationKind::DuplicateId => "duplicate id",
            ViolationKind::DeclaredMTooSmall => "declared m smaller than number of records",
            ViolationKind::DeclaredR1TooSmall => {
                "declared r1 smaller than number of follow-up values"
            }
            ViolationKind::DeclaredR1ExceedsM => "declared r1 larger than m",
        };
        match self.row {
            Some(row) => write!(f, "{what} (row {}: {})", row + 1, self.detail),
            None => write!(f, "{what} ({})", self.detail),
        }
    }
}

fn is_probability(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

/// Checks every dataset invariant and returns all violations found; an empty
/// list means the dataset is valid.
pub fn validate_dataset(data: &StudyPairData) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::with_capacity(data.records.len());
    for (row, r) in data.records.iter().enumerate() {
        if !is_probability(r.p1) {
            out.push(Violation {
                kind: ViolationKind::P1OutOfRange,
                row: Some(row),
                detail: format!("p1 = {}", r.p1),
            });
        }
        if let Some(p2) = r.p2 {
            if !is_probability(p2) {
                out.push(Violation {
                    kind: ViolationKind::P2OutOfRange,
                    row: Some(row),
                    detail: format!("p2 = {p2}"),
                });
            }
        }
        if r.id.is_empty() {
            out.push(Violation {
                kind: ViolationKind::EmptyId,
                row: Some(row),
                detail: String::new(),
            });
        } else if !seen.insert(r.id.as_str()) {
            out.push(Violation {
                kind: ViolationKind::DuplicateId,
                row: Some(row),
                detail: format!("id {:?}", r.id),
            });
        }
    }
    let n = data.records.len();
    if let Some(m) = data.m_declared {
        if m < n || m == 0 {
            out.push(Violation {
                kind: ViolationKind::DeclaredMTooSmall,
                row: None,
                detail: format!("m = {m}, records = {n}"),
            });
        }
    }
    if let Some(r1) = data.r1_declared {
        let followed = data.followed_up_count();
        if r1 < followed || r1 == 0 {
            out.push(Violation {
                kind: ViolationKind::DeclaredR1TooSmall,
                row: None,
                detail: format!("r1 = {r1}, follow-up values = {followed}"),
            });
        }
        if r1 > data.m() {
            out.push(Violation {
                kind: ViolationKind::DeclaredR1ExceedsM,
                row: None,
                detail: format!("r1 = {r1}, m = {}", data.m()),
            });
        }
    }
    out
}

/// Which of the two elementary nulls are false for a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruthLabel {
    /// Null in both studies.
    I00,
    /// Null in the primary study, non-null in the follow-up.
    I01,
    /// Non-null in the primary study, null in the follow-up.
    I10,
    /// Non-null in both: the no-replicability null is false.
    I11,
}

impl TruthLabel {
    pub fn primary_non_null(self) -> bool {
        matches!(self, TruthLabel::I10 | TruthLabel::I11)
    }

    pub fn followup_non_null(self) -> bool {
        matches!(self, TruthLabel::I01 | TruthLabel::I11)
    }

    /// True when the no-replicability null is true.
    pub fn no_replicability_null(self) -> bool {
        self != TruthLabel::I11
    }
}

/// Per-hypothesis truth for a simulated family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthAssignment {
    labels: Vec<TruthLabel>,
}

impl TruthAssignment {
    pub fn new(labels: Vec<TruthLabel>) -> Self {
        Self { labels }
    }

    /// Contiguous blocks in the order I00, I01, I10, I11.
    pub fn from_counts(counts: [usize; 4]) -> Self {
        let order = [TruthLabel::I00, TruthLabel::I01, TruthLabel::I10, TruthLabel::I11];
        let labels = order
            .iter()
            .zip(counts)
            .flat_map(|(&l, n)| std::iter::repeat_n(l, n))
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[TruthLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Counts of (I00, I01, I10, I11).
    pub fn counts(&self) -> [usize; 4] {
        let mut c = [0usize; 4];
        for l in &self.labels {
            c[*l as usize] += 1;
        }
        c
    }
}

/// Dependence assumption a procedure run is calibrated for.
///
/// `Independent` and `PrdsFollowup` run the same thresholds; the second
/// exists so a report records the assumption the user made.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DependenceMode {
    #[default]
    Independent,
    PrdsFollowup,
    /// Arbitrary dependence in the primary study: primary level q1 / H_m.
    ArbitraryPrimaryItem1,
    /// Arbitrary dependence in the primary study with every followed-up
    /// hypothesis satisfying p1 <= t: primary level from the thresholded
    /// solver.
    ArbitraryPrimaryItem2 { t: f64 },
    /// Arbitrary dependence in both studies: follow-up level (q - q1) / H_R1
    /// and the primary level shrunk as in item 1 (`t = None`) or item 2.
    ArbitraryBoth { t: Option<f64> },
}

impl DependenceMode {
    pub fn label(&self) -> &'static str {
        match self {
            DependenceMode::Independent => "independent",
            DependenceMode::PrdsFollowup => "prds",
            DependenceMode::ArbitraryPrimaryItem1 => "item1",
            DependenceMode::ArbitraryPrimaryItem2 { .. } => "item2",
            DependenceMode::ArbitraryBoth { .. } => "both",
        }
    }

    /// Threshold t when the mode carries one.
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            DependenceMode::ArbitraryPrimaryItem2 { t } => Some(t),
            DependenceMode::ArbitraryBoth { t } => t,
            _ => None,
        }
    }
}

/// Levels that fully determine a procedure run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureParams {
    /// Primary-study level (alpha1 in FWER mode).
    pub q1: f64,
    /// Overall level (alpha in FWER mode).
    pub q: f64,
    /// Weight on study one as the primary study; only the symmetric
    /// procedure reads it.
    pub w1: f64,
    pub dependence: DependenceMode,
}

impl ProcedureParams {
    pub fn fdr(q1: f64, q: f64) -> Result<Self> {
        Self::symmetric(1.0, q1, q)
    }

    pub fn fwer(alpha1: f64, alpha: f64) -> Result<Self> {
        Self::fdr(alpha1, alpha)
    }

    pub fn symmetric(w1: f64, q1: f64, q: f64) -> Result<Self> {
        let p = Self {
            q1,
            q,
            w1,
            dependence: DependenceMode::Independent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dependence(mut self, dependence: DependenceMode) -> Result<Self> {
        self.dependence = dependence;
        self.validate()?;
        Ok(self)
    }

    pub fn alpha1(&self) -> f64 {
        self.q1
    }

    pub fn alpha(&self) -> f64 {
        self.q
    }

    /// Ratio c = q1 / q.
    pub fn c(&self) -> f64 {
        self.q1 / self.q
    }

    pub fn validate(&self) -> Result<()> {
        check_levels(self.q1, self.q)?;
        if !(0.0..=1.0).contains(&self.w1) {
            return Err(ReplError::Domain(format!("w1 must lie in [0, 1], got {}", self.w1)));
        }
        if let Some(t) = self.dependence.threshold() {
            if !(t > 0.0 && t < 1.0) {
                return Err(ReplError::Domain(format!("t must lie in (0, 1), got {t}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_levels(q1: f64, q: f64) -> Result<()> {
    if !(q1 > 0.0 && q1 < q && q < 1.0) {
        return Err(ReplError::Domain(format!(
            "levels must satisfy 0 < q1 < q < 1, got q1 = {q1}, q = {q}"
        )));
    }
    Ok(())
}

pub(crate) fn check_ratio(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(ReplError::Domain(format!("c must lie in (0, 1), got {c}")));
    }
    Ok(())
}

/// Score of a followed-up hypothesis: its Z-value and replicability-adjusted
/// p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisScore {
    pub index: usize,
    pub id: String,
    pub z: f64,
    pub adjusted_p: f64,
}

/// Outcome of a procedure run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscoveryReport {
    pub procedure: String,
    /// Rejected row indices in input order.
    pub rejected: Vec<usize>,
    pub rejected_ids: Vec<String>,
    /// Follow-up set size R1.
    pub r1: usize,
    /// Number of rejections R2.
    pub r2: usize,
    /// Realized primary-study cut-off.
    pub primary_threshold: Option<f64>,
    /// Realized follow-up cut-off.
    pub followup_threshold: Option<f64>,
    /// Primary level after any dependence modification.
    pub effective_q1: Option<f64>,
    /// Follow-up level after any dependence modification.
    pub effective_q2: Option<f64>,
    /// Scores of followed-up hypotheses, in input order.
    pub per_hypothesis: Vec<HypothesisScore>,
    /// Scores were computed over listed rows only while the declared
    /// follow-up set is larger; adjusted values are then upper bounds.
    pub partial: bool,
    /// Directed runs that make up a combined procedure.
    pub components: Vec<DiscoveryReport>,
}

impl DiscoveryReport {
    pub fn is_rejected(&self, index: usize) -> bool {
        self.rejected.binary_search(&index).is_ok()
    }
}
