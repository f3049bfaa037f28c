//! Follow-up selection rules and the Benjamini–Hochberg step-up.

use std::collections::HashMap;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ReplError, Result};
use crate::types::StudyPairData;

/// Benjamini–Hochberg step-up at level `q` over the given p-values.
///
/// Returns the rejected indices in input order. Every p-value at or below the
/// realized cut-off k*·q/m is rejected, so ties are handled deterministically.
pub fn bh_reject(pvalues: &[f64], q: f64) -> Vec<usize> {
    bh_reject_with_m(pvalues, q, pvalues.len())
}

/// BH step-up where the family has `m >= pvalues.len()` members and the
/// unlisted ones are treated as p = 1.
pub(crate) fn bh_reject_with_m(pvalues: &[f64], q: f64, m: usize) -> Vec<usize> {
    match bh_cutoff(pvalues, q, m) {
        Some(cut) => (0..pvalues.len()).filter(|&i| pvalues[i] <= cut).collect(),
        None => Vec::new(),
    }
}

/// Realized BH cut-off k*·q/m, or `None` when nothing is rejected.
pub(crate) fn bh_cutoff(pvalues: &[f64], q: f64, m: usize) -> Option<f64> {
    if pvalues.is_empty() || m == 0 {
        return None;
    }
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mf = m as f64;
    (1..=sorted.len())
        .rev()
        .find(|&i| sorted[i - 1] <= i as f64 * q / mf)
        .map(|k| k as f64 * q / mf)
}

/// BH-adjusted p-values (step-up, capped at 1) for a family of size
/// `m >= pvalues.len()`.
pub fn bh_adjust(pvalues: &[f64], m: usize) -> Vec<f64> {
    let n = pvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut out = vec![0.0; n];
    let mut running = 1.0f64;
    for rank in (1..=n).rev() {
        let i = order[rank - 1];
        running = running.min(pvalues[i] * m as f64 / rank as f64);
        out[i] = running.min(1.0);
    }
    out
}

/// How the follow-up set R1 is chosen from the primary-study p-values.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionRule {
    /// Hypotheses rejected by BH at the level on the primary p-values.
    BhAtLevel(f64),
    /// p1 <= level / m.
    BonferroniThreshold(f64),
    /// The k smallest p1, ties broken by input order.
    TopK(usize),
    /// p1 <= t.
    FixedThreshold(f64),
    /// A set of ids chosen outside the data.
    Explicit(Vec<String>),
}

impl SelectionRule {
    pub fn check(&self) -> Result<()> {
        let level_ok = |v: f64| v > 0.0 && v < 1.0;
        match self {
            SelectionRule::BhAtLevel(l)
            | SelectionRule::BonferroniThreshold(l)
            | SelectionRule::FixedThreshold(l)
                if !level_ok(*l) =>
            {
                Err(ReplError::Domain(format!("selection level must lie in (0, 1), got {l}")))
            }
            SelectionRule::TopK(0) => Err(ReplError::Domain("top-k needs k >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Selection from a primary p-value vector in a family of size `m`.
    /// Not available for explicit rules.
    pub(crate) fn select_from_p1(&self, p1: &[f64], m: usize) -> Result<Vec<usize>> {
        self.check()?;
        match *self {
            SelectionRule::BhAtLevel(level) => Ok(bh_reject_with_m(p1, level, m)),
            SelectionRule::BonferroniThreshold(level) => {
                let cut = level / m as f64;
                Ok((0..p1.len()).filter(|&i| p1[i] <= cut).collect())
            }
            SelectionRule::FixedThreshold(t) => Ok((0..p1.len()).filter(|&i| p1[i] <= t).collect()),
            SelectionRule::TopK(k) => {
                if k > p1.len() {
                    return Err(ReplError::Domain(format!(
                        "top-k selection with k = {k} exceeds the {} available hypotheses",
                        p1.len()
                    )));
                }
                let mut order: Vec<usize> = (0..p1.len()).collect();
                // stable: equal p-values keep input order
                order.sort_by(|&a, &b| p1[a].total_cmp(&p1[b]));
                order.truncate(k);
                order.sort_unstable();
                Ok(order)
            }
            SelectionRule::Explicit(_) => Err(ReplError::Domain(
                "explicit selection needs the dataset ids".into(),
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SelectionRule::BhAtLevel(l) => format!("bh:{l}"),
            SelectionRule::BonferroniThreshold(l) => format!("bonferroni:{l}"),
            SelectionRule::TopK(k) => format!("top:{k}"),
            SelectionRule::FixedThreshold(t) => format!("threshold:{t}"),
            SelectionRule::Explicit(ids) => format!("explicit:{}", ids.len()),
        }
    }
}

/// Anything that maps a dataset to a follow-up set. Implemented by
/// [`SelectionRule`]; tests implement it for rules outside the enum.
pub trait Selector {
    /// Selected row indices in input order.
    fn select_indices(&self, data: &StudyPairData) -> Result<Vec<usize>>;
}

impl Selector for SelectionRule {
    fn select_indices(&self, data: &StudyPairData) -> Result<Vec<usize>> {
        match self {
            SelectionRule::Explicit(ids) => {
                let pos: HashMap<&str, usize> = data
                    .records()
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (r.id.as_str(), i))
                    .collect();
                let mut out = ids
                    .iter()
                    .map(|id| {
                        pos.get(id.as_str()).copied().ok_or_else(|| {
                            ReplError::Data(format!("selected id {id:?} is not in the dataset"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
            rule => rule.select_from_p1(&data.p1_values(), data.m()),
        }
    }
}

impl<F> Selector for F
where
    F: Fn(&StudyPairData) -> Result<Vec<usize>>,
{
    fn select_indices(&self, data: &StudyPairData) -> Result<Vec<usize>> {
        self(data)
    }
}

/// Takes every row that carries a follow-up p-value, i.e. the follow-up set
/// as recorded in the data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FollowedUp;

impl Selector for FollowedUp {
    fn select_indices(&self, data: &StudyPairData) -> Result<Vec<usize>> {
        Ok(data.followed_up_indices())
    }
}

/// Either the recorded follow-up set or a rule applied to p1.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionSpec {
    Followed,
    Rule(SelectionRule),
}

impl SelectionSpec {
    pub fn label(&self) -> String {
        match self {
            SelectionSpec::Followed => "followed".into(),
            SelectionSpec::Rule(r) => r.label(),
        }
    }
}

impl Selector for SelectionSpec {
    fn select_indices(&self, data: &StudyPairData) -> Result<Vec<usize>> {
        match self {
            SelectionSpec::Followed => FollowedUp.select_indices(data),
            SelectionSpec::Rule(r) => r.select_indices(data),
        }
    }
}

/// The follow-up set R1 as ids, in input order.
pub fn select(rule: &SelectionRule, data: &StudyPairData) -> Result<Vec<String>> {
    Ok(data.ids_of(&rule.select_indices(data)?))
}

/// A perturbation of one selected p-value that kept the hypothesis selected
/// but changed the follow-up set.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityCounterexample {
    pub index: usize,
    pub id: String,
    pub original_p1: f64,
    pub perturbed_p1: f64,
    pub original_size: usize,
    pub perturbed_size: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeReport {
    /// Perturbations under which the hypothesis stayed selected.
    pub perturbations_checked: usize,
    pub counterexamples: Vec<ValidityCounterexample>,
}

impl ProbeReport {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Empirical check that a rule is a valid selection rule: moving one selected
/// p-value while it stays selected must leave the follow-up set unchanged.
///
/// For each selected hypothesis, `grid_size` evenly spaced values in
/// (0, p1] and `grid_size` seeded uniform values in (0, 1) are tried. A clean
/// report is evidence, not proof.
pub fn probe_validity<S: Selector + ?Sized>(
    rule: &S,
    data: &StudyPairData,
    grid_size: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if grid_size < 2 {
        return Err(ReplError::Domain("probe grid needs at least two points".into()));
    }
    let original = rule.select_indices(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport::default();
    let mut records = data.records().to_vec();
    for &j in &original {
        let p = records[j].p1;
        let mut candidates: Vec<f64> = (1..=grid_size)
            .map(|i| p * i as f64 / grid_size as f64)
            .collect();
        candidates.extend((0..grid_size).map(|_| unit_open(rng.next_u64())));
        for v in candidates {
            records[j].p1 = v;
            let probe = StudyPairData::new(records.clone(), data.m_declared(), data.r1_declared());
            let sel = rule.select_indices(&probe)?;
            if sel.binary_search(&j).is_err() {
                continue;
            }
            report.perturbations_checked += 1;
            if sel != original {
                report.counterexamples.push(ValidityCounterexample {
                    index: j,
                    id: records[j].id.clone(),
                    original_p1: p,
                    perturbed_p1: v,
                    original_size: original.len(),
                    perturbed_size: sel.len(),
                });
            }
        }
        records[j].p1 = p;
    }
    Ok(report)
}

/// Maps 64 random bits to the open interval (0, 1).
pub(crate) fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
