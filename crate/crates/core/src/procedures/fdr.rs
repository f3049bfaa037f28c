use crate::error::{ReplError, Result};
use crate::numeric::{harmonic, solve_oracle_qprime, solve_q1_tilde_thresholded};
use crate::selection::Selector;
use crate::types::{
    check_levels, check_ratio, DependenceMode, DiscoveryReport, HypothesisScore, StudyPairData,
};

/// Follow-up set of one directed run, resolved against the data.
#[derive(Debug, Clone)]
pub(crate) struct FollowUp {
    /// Selected rows, input order.
    pub selected: Vec<usize>,
    /// Effective R1 (declared size or the selection size).
    pub r1: usize,
}

/// Result of the step-up over a follow-up set.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StageOutcome {
    pub r2: usize,
    pub rejected: Vec<usize>,
    pub primary_threshold: f64,
    pub followup_threshold: f64,
}

pub(crate) fn passes(p1: f64, p2: f64, r: usize, a: f64, b: f64) -> bool {
    let r = r as f64;
    p1 <= r * a && p2 <= r * b
}

/// Smallest r >= 1 at which a hypothesis clears both cut-offs r·a and r·b,
/// or `None` when that r exceeds `cap`.
fn entry_rank(p1: f64, p2: f64, a: f64, b: f64, cap: usize) -> Option<usize> {
    let guess = (p1 / a).max(p2 / b).ceil();
    if !(guess <= cap as f64 + 1.0) {
        return None;
    }
    let mut r = (guess as usize).max(1);
    // settle float rounding against the exact comparison used everywhere else
    while r > 1 && passes(p1, p2, r - 1, a, b) {
        r -= 1;
    }
    while r <= cap && !passes(p1, p2, r, a, b) {
        r += 1;
    }
    (r <= cap).then_some(r)
}

/// Two-stage step-up on a follow-up set with per-study levels `q1_eff` and
/// `q2_eff`: R2 = max{r : #{j ∈ R1 : p1 <= r·q1_eff/m, p2 <= r·q2_eff/R1} = r}.
///
/// Each row gets the smallest r at which it clears both cut-offs; R2 is then
/// a sorted step-up over those ranks. Rows without a follow-up value cannot
/// be rejected.
pub(crate) fn two_stage_step_up(
    p1: &[f64],
    p2: &[Option<f64>],
    m: usize,
    follow: &FollowUp,
    q1_eff: f64,
    q2_eff: f64,
) -> StageOutcome {
    let a = q1_eff / m as f64;
    let b = q2_eff / follow.r1.max(1) as f64;
    let cap = follow.selected.len();
    let mut ranks: Vec<(usize, usize)> = follow
        .selected
        .iter()
        .filter_map(|&j| {
            let p2j = p2[j]?;
            entry_rank(p1[j], p2j, a, b, cap).map(|r| (r, j))
        })
        .collect();
    ranks.sort_unstable();
    let r2 = (1..=ranks.len())
        .rev()
        .find(|&i| ranks[i - 1].0 <= i)
        .unwrap_or(0);
    let mut rejected: Vec<usize> = ranks
        .iter()
        .take_while(|(r, _)| *r <= r2)
        .map(|&(_, j)| j)
        .collect();
    rejected.sort_unstable();
    StageOutcome {
        r2,
        rejected,
        primary_threshold: r2 as f64 * a,
        followup_threshold: r2 as f64 * b,
    }
}

/// Primary and follow-up levels after the dependence modification.
pub(crate) fn effective_levels(
    q1: f64,
    q: f64,
    m: usize,
    r1: usize,
    mode: DependenceMode,
) -> Result<(f64, f64)> {
    let shrink_primary = |t: Option<f64>| -> Result<f64> {
        match t {
            None => Ok(q1 / harmonic(m)?),
            Some(t) => solve_q1_tilde_thresholded(q1, m, t),
        }
    };
    match mode {
        DependenceMode::Independent | DependenceMode::PrdsFollowup => Ok((q1, q - q1)),
        DependenceMode::ArbitraryPrimaryItem1 => Ok((shrink_primary(None)?, q - q1)),
        DependenceMode::ArbitraryPrimaryItem2 { t } => Ok((shrink_primary(Some(t))?, q - q1)),
        DependenceMode::ArbitraryBoth { t } => {
            Ok((shrink_primary(t)?, (q - q1) / harmonic(r1.max(1))?))
        }
    }
}

/// Resolves the selection against the data: checks follow-up coverage and
/// the declared R1.
pub(crate) fn resolve_follow_up<S: Selector + ?Sized>(
    data: &StudyPairData,
    rule: &S,
) -> Result<FollowUp> {
    let selected = rule.select_indices(data)?;
    let r1 = match data.r1_declared() {
        Some(declared) => {
            if selected.len() > declared {
                return Err(ReplError::Data(format!(
                    "selection picked {} hypotheses but the declared follow-up set has {declared}",
                    selected.len()
                )));
            }
            declared
        }
        None => {
            if let Some(&j) = selected.iter().find(|&&j| data.records()[j].p2.is_none()) {
                return Err(ReplError::Data(format!(
                    "selected hypothesis {:?} has no follow-up p-value",
                    data.records()[j].id
                )));
            }
            selected.len()
        }
    };
    Ok(FollowUp { selected, r1 })
}

/// Z_j = max(m·p1/c1, R1·p2/c2) for rows with a follow-up value, and the
/// step-up adjusted value min_{k>=i} Z_(k)/k. Sorted by Z, ties by index.
pub(crate) fn step_up_scores(
    p1: &[f64],
    p2: &[Option<f64>],
    rows: &[usize],
    m: usize,
    r1: usize,
    c1: f64,
    c2: f64,
) -> Vec<(usize, f64, f64)> {
    let mut z: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|&j| {
            let p2j = p2[j]?;
            Some((j, (m as f64 * p1[j] / c1).max(r1 as f64 * p2j / c2)))
        })
        .collect();
    z.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut out = vec![(0, 0.0, 0.0); z.len()];
    let mut running = f64::INFINITY;
    for i in (0..z.len()).rev() {
        running = running.min(z[i].1 / (i + 1) as f64);
        out[i] = (z[i].0, z[i].1, running.min(1.0));
    }
    out
}

/// Snaps adjusted values that sit within rounding of `level` onto the side
/// given by the exact threshold comparisons.
fn reconcile(scores: &mut [HypothesisScore], rejected: &[usize], level: f64) {
    for s in scores {
        let hit = rejected.binary_search(&s.index).is_ok();
        if hit && s.adjusted_p > level {
            s.adjusted_p = level;
        } else if !hit && s.adjusted_p <= level {
            s.adjusted_p = level.next_up();
        }
    }
}

fn to_scores(data: &StudyPairData, scored: Vec<(usize, f64, f64)>) -> Vec<HypothesisScore> {
    scored
        .into_iter()
        .map(|(index, z, adjusted_p)| HypothesisScore {
            index,
            id: data.records()[index].id.clone(),
            z,
            adjusted_p,
        })
        .collect()
}

/// FDR-replicability Z-values and adjusted p-values at ratio c = q1/q over
/// the rows that carry a follow-up value, sorted by Z.
///
/// Thresholding the adjusted values at q reproduces the two-stage FDR
/// procedure at (c·q, q) with that follow-up set.
pub fn fdr_replicability_adjust(data: &StudyPairData, c: f64) -> Result<Vec<HypothesisScore>> {
    check_ratio(c)?;
    data.ensure_valid()?;
    let rows = data.followed_up_indices();
    let scored = step_up_scores(
        &data.p1_values(),
        &data.p2_values(),
        &rows,
        data.m(),
        data.r1(),
        c,
        1.0 - c,
    );
    Ok(to_scores(data, scored))
}

/// Two-stage FDR procedure over the no-replicability nulls.
///
/// The follow-up set comes from `rule`; the primary level is shrunk according
/// to `mode`. Scores in the report use the effective levels, so a hypothesis
/// is rejected exactly when its adjusted value is at most `q`.
pub fn fdr_two_stage<S: Selector + ?Sized>(
    data: &StudyPairData,
    rule: &S,
    q1: f64,
    q: f64,
    mode: DependenceMode,
) -> Result<DiscoveryReport> {
    check_levels(q1, q)?;
    data.ensure_valid()?;
    let follow = resolve_follow_up(data, rule)?;
    let m = data.m();
    let (q1_eff, q2_eff) = effective_levels(q1, q, m, follow.r1, mode)?;
    if let Some(t) = mode.threshold() {
        if let Some(&j) = follow.selected.iter().find(|&&j| data.records()[j].p1 > t) {
            return Err(ReplError::Applicability(format!(
                "hypothesis {:?} was followed up with p1 = {:e} above the threshold t = {t:e}",
                data.records()[j].id,
                data.records()[j].p1
            )));
        }
    }
    let p1 = data.p1_values();
    let p2 = data.p2_values();
    let outcome = two_stage_step_up(&p1, &p2, m, &follow, q1_eff, q2_eff);
    let scored = step_up_scores(&p1, &p2, &follow.selected, m, follow.r1, q1_eff / q, q2_eff / q);
    let mut per_hypothesis = to_scores(data, scored);
    per_hypothesis.sort_by_key(|s| s.index);
    reconcile(&mut per_hypothesis, &outcome.rejected, q);
    let listed = per_hypothesis.len();
    Ok(DiscoveryReport {
        procedure: format!("fdr-two-stage[{}]", mode.label()),
        rejected_ids: data.ids_of(&outcome.rejected),
        rejected: outcome.rejected,
        r1: follow.r1,
        r2: outcome.r2,
        primary_threshold: Some(outcome.primary_threshold),
        followup_threshold: Some(outcome.followup_threshold),
        effective_q1: Some(q1_eff),
        effective_q2: Some(q2_eff),
        per_hypothesis,
        partial: follow.r1 > listed,
        components: Vec::new(),
    })
}

/// Symmetric two-stage procedure: the union of the run with study one as
/// primary at (w1·q1, w1·q) and the reversed run at ((1−w1)·q1, (1−w1)·q).
/// A zero weight skips its direction.
pub fn fdr_symmetric<S1, S2>(
    data: &StudyPairData,
    rule_study1: &S1,
    rule_study2: &S2,
    w1: f64,
    q1: f64,
    q: f64,
    mode: DependenceMode,
) -> Result<DiscoveryReport>
where
    S1: Selector + ?Sized,
    S2: Selector + ?Sized,
{
    check_levels(q1, q)?;
    if !(0.0..=1.0).contains(&w1) {
        return Err(ReplError::Domain(format!("w1 must lie in [0, 1], got {w1}")));
    }
    data.require_complete()?;
    let mut components = Vec::with_capacity(2);
    let mut weights = Vec::with_capacity(2);
    let mut rejected = Vec::new();
    if w1 > 0.0 {
        let forward = fdr_two_stage(data, rule_study1, w1 * q1, w1 * q, mode)?;
        rejected.extend_from_slice(&forward.rejected);
        components.push(forward);
        weights.push(w1);
    }
    if w1 < 1.0 {
        let w2 = 1.0 - w1;
        let backward = fdr_two_stage(&data.swapped()?, rule_study2, w2 * q1, w2 * q, mode)?;
        rejected.extend_from_slice(&backward.rejected);
        components.push(backward);
        weights.push(w2);
    }
    rejected.sort_unstable();
    rejected.dedup();

    // a direction at weight w rejects when its adjusted value is <= w·q
    let mut best: Vec<Option<HypothesisScore>> = vec![None; data.len()];
    for (comp, &w) in components.iter().zip(&weights) {
        for s in &comp.per_hypothesis {
            let adjusted_p = (s.adjusted_p / w).min(1.0);
            if best[s.index].as_ref().is_none_or(|b| adjusted_p < b.adjusted_p) {
                best[s.index] = Some(HypothesisScore { z: s.z / w, adjusted_p, ..s.clone() });
            }
        }
    }
    let mut per_hypothesis: Vec<HypothesisScore> = best.into_iter().flatten().collect();
    reconcile(&mut per_hypothesis, &rejected, q);
    Ok(DiscoveryReport {
        procedure: format!("fdr-symmetric[w1={w1}]"),
        rejected_ids: data.ids_of(&rejected),
        r2: rejected.len(),
        r1: components.iter().map(|c| c.r1).max().unwrap_or(0),
        rejected,
        components,
        per_hypothesis,
        ..Default::default()
    })
}

/// Two-stage FDR at (q', 2q') with q' calibrated from the true null
/// fractions f00 and f01. w1 = 1 runs study one as primary, w1 = 0 the
/// reverse, and w1 = 0.5 the symmetric union.
pub fn oracle_calibrated_run<S: Selector + ?Sized>(
    data: &StudyPairData,
    rule: &S,
    f00: f64,
    f01: f64,
    q: f64,
    w1: f64,
) -> Result<DiscoveryReport> {
    let qp = solve_oracle_qprime(f00, f01, q, w1)?;
    let mut report = if w1 == 1.0 {
        fdr_two_stage(data, rule, qp, 2.0 * qp, DependenceMode::Independent)?
    } else if w1 == 0.0 {
        let mut r = fdr_two_stage(&data.swapped()?, rule, qp, 2.0 * qp, DependenceMode::Independent)?;
        // scores refer to the swapped roles; rows and ids are unchanged
        r.procedure.push_str("[reversed]");
        r
    } else {
        fdr_symmetric(data, rule, rule, w1, qp, 2.0 * qp, DependenceMode::Independent)?
    };
    report.effective_q1 = Some(qp);
    report.effective_q2 = Some(qp);
    report.procedure = format!("oracle[q'={qp}] {}", report.procedure);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::SelectionRule;
    use crate::types::HypothesisRecord;

    // Exhaustive scan of the R2 definition.
    fn r2_scan(p1: &[f64], p2: &[Option<f64>], m: usize, follow: &FollowUp, q1: f64, q2: f64) -> usize {
        let a = q1 / m as f64;
        let b = q2 / follow.r1 as f64;
        (0..=follow.r1)
            .filter(|&r| {
                let n = follow
                    .selected
                    .iter()
                    .filter(|&&j| p2[j].is_some_and(|p2j| passes(p1[j], p2j, r, a, b)))
                    .count();
                n == r
            })
            .max()
            .unwrap_or(0)
    }

    fn synthetic() -> StudyPairData {
        StudyPairData::new(
            vec![
                HypothesisRecord::new("1", 0.001, Some(0.001)),
                HypothesisRecord::new("2", 0.002, Some(0.04)),
                HypothesisRecord::new("3", 0.5, None),
                HypothesisRecord::new("4", 0.6, None),
            ],
            None,
            None,
        )
    }

    #[test]
    fn synthetic_four_hypotheses() {
        let d = synthetic();
        let rule = SelectionRule::Explicit(vec!["1".into(), "2".into()]);
        let follow = resolve_follow_up(&d, &rule).unwrap();
        let scan = r2_scan(&d.p1_values(), &d.p2_values(), 4, &follow, 0.025, 0.025);
        assert_eq!(scan, 1);
        let rep = fdr_two_stage(&d, &rule, 0.025, 0.05, DependenceMode::Independent).unwrap();
        assert_eq!(rep.r2, 1);
        assert_eq!(rep.rejected_ids, vec!["1".to_string()]);
        assert_eq!(rep.r1, 2);
        assert!((rep.primary_threshold.unwrap() - 0.025 / 4.0).abs() < 1e-15);
        assert!((rep.followup_threshold.unwrap() - 0.025 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn selected_row_without_follow_up_is_a_data_error() {
        let d = synthetic();
        let rule = SelectionRule::TopK(3);
        let err = fdr_two_stage(&d, &rule, 0.025, 0.05, DependenceMode::Independent).unwrap_err();
        assert!(matches!(err, ReplError::Data(_)));
        // a declared R1 turns the missing row into a non-rejectable member
        let d = StudyPairData::new(d.records().to_vec(), None, Some(3));
        let rep = fdr_two_stage(&d, &rule, 0.025, 0.05, DependenceMode::Independent).unwrap();
        assert_eq!(rep.r1, 3);
        assert!(rep.partial);
    }

    #[test]
    fn item2_rejects_followed_rows_above_t() {
        let d = synthetic();
        let rule = SelectionRule::Explicit(vec!["1".into(), "2".into()]);
        let mode = DependenceMode::ArbitraryPrimaryItem2 { t: 0.0015 };
        let err = fdr_two_stage(&d, &rule, 0.04, 0.05, mode).unwrap_err();
        assert!(matches!(err, ReplError::Applicability(_)));
    }

    #[test]
    fn all_ones_reject_nothing() {
        let d = StudyPairData::from_pairs((0..10).map(|i| (i.to_string(), 1.0, 1.0)));
        let rule = SelectionRule::TopK(10);
        let rep = fdr_two_stage(&d, &rule, 0.025, 0.05, DependenceMode::Independent).unwrap();
        assert_eq!(rep.r2, 0);
        assert!(rep.rejected.is_empty());
    }

    #[test]
    fn adjusted_single_zero() {
        let d = StudyPairData::from_pairs([("a", 0.0, 0.0)]);
        let s = fdr_replicability_adjust(&d, 0.5).unwrap();
        assert_eq!(s[0].adjusted_p, 0.0);
        assert!(fdr_replicability_adjust(&d, 1.0).is_err());
    }

    #[test]
    fn arbitrary_both_shrinks_follow_up_level() {
        let (a1, a2) = effective_levels(0.02, 0.05, 100, 10, DependenceMode::Independent).unwrap();
        let (b1, b2) =
            effective_levels(0.02, 0.05, 100, 10, DependenceMode::ArbitraryBoth { t: None }).unwrap();
        assert_eq!(a1, 0.02);
        assert!((b1 - 0.02 / harmonic(100).unwrap()).abs() < 1e-15);
        assert!((a2 - 0.03).abs() < 1e-15);
        assert!((b2 - 0.03 / harmonic(10).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_degenerate_weights() {
        let d = StudyPairData::from_pairs([
            ("a", 1e-5, 0.01),
            ("b", 0.02, 1e-6),
            ("c", 0.3, 0.4),
            ("d", 1e-4, 1e-4),
        ]);
        let rule = SelectionRule::BhAtLevel(0.025);
        let mode = DependenceMode::Independent;
        let fwd = fdr_two_stage(&d, &rule, 0.025, 0.05, mode).unwrap();
        let sym1 = fdr_symmetric(&d, &rule, &rule, 1.0, 0.025, 0.05, mode).unwrap();
        assert_eq!(sym1.rejected, fwd.rejected);
        let back = fdr_two_stage(&d.swapped().unwrap(), &rule, 0.025, 0.05, mode).unwrap();
        let sym0 = fdr_symmetric(&d, &rule, &rule, 0.0, 0.025, 0.05, mode).unwrap();
        assert_eq!(sym0.rejected, back.rejected);
        assert_eq!(sym0.components.len(), 1);
    }

    #[test]
    fn oracle_run_levels() {
        let d = StudyPairData::from_pairs([("a", 1e-4, 1e-3), ("b", 0.5, 0.5)]);
        let rule = SelectionRule::TopK(2);
        let r = oracle_calibrated_run(&d, &rule, 0.0, 0.0, 0.05, 1.0).unwrap();
        assert_eq!(r.effective_q1, Some(0.05));
        let r = oracle_calibrated_run(&d, &rule, 0.999, 0.00036, 0.05, 1.0).unwrap();
        assert!((r.effective_q1.unwrap() - 0.0477).abs() < 5e-4);
    }
}
