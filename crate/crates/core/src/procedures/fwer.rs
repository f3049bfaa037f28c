use crate::error::Result;
use crate::procedures::fdr::resolve_follow_up;
use crate::selection::Selector;
use crate::types::{check_levels, check_ratio, DiscoveryReport, HypothesisScore, StudyPairData};

/// FWER controlling procedure applied within each study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FwerMethod {
    #[default]
    Bonferroni,
    Holm,
}

impl FwerMethod {
    /// Indices (into `pvalues`) rejected at level `alpha` in a family of
    /// `n >= pvalues.len()` hypotheses; unlisted members count as p = 1.
    pub(crate) fn reject(self, pvalues: &[f64], alpha: f64, n: usize) -> Vec<usize> {
        if n == 0 {
            return Vec::new();
        }
        match self {
            FwerMethod::Bonferroni => {
                let cut = alpha / n as f64;
                (0..pvalues.len()).filter(|&i| pvalues[i] <= cut).collect()
            }
            FwerMethod::Holm => {
                let mut order: Vec<usize> = (0..pvalues.len()).collect();
                order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
                let mut out: Vec<usize> = order
                    .iter()
                    .enumerate()
                    .take_while(|&(i, &j)| pvalues[j] <= alpha / (n - i) as f64)
                    .map(|(_, &j)| j)
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FwerMethod::Bonferroni => "bonferroni",
            FwerMethod::Holm => "holm",
        }
    }
}

/// Two-stage FWER procedure: an FWER procedure at α1 on all m primary
/// p-values, another at α − α1 on the follow-up p-values of the selected
/// set; the rejections are the intersection.
pub fn fwer_two_stage<S: Selector + ?Sized>(
    data: &StudyPairData,
    rule: &S,
    alpha1: f64,
    alpha: f64,
    method: FwerMethod,
) -> Result<DiscoveryReport> {
    check_levels(alpha1, alpha)?;
    data.ensure_valid()?;
    let follow = resolve_follow_up(data, rule)?;
    let m = data.m();
    let p1 = data.p1_values();
    let primary = method.reject(&p1, alpha1, m);

    let listed: Vec<usize> = follow
        .selected
        .iter()
        .copied()
        .filter(|&j| data.records()[j].p2.is_some())
        .collect();
    let p2_listed: Vec<f64> = listed
        .iter()
        .map(|&j| data.records()[j].p2.unwrap_or(1.0))
        .collect();
    let followup: Vec<usize> = method
        .reject(&p2_listed, alpha - alpha1, follow.r1)
        .into_iter()
        .map(|i| listed[i])
        .collect();

    let rejected: Vec<usize> = followup
        .into_iter()
        .filter(|j| primary.binary_search(j).is_ok())
        .collect();

    let c = alpha1 / alpha;
    let per_hypothesis = bonferroni_scores(data, &listed, m, follow.r1, c);
    let (pt, ft) = match method {
        FwerMethod::Bonferroni => (
            Some(alpha1 / m as f64),
            Some((alpha - alpha1) / follow.r1.max(1) as f64),
        ),
        FwerMethod::Holm => (None, None),
    };
    Ok(DiscoveryReport {
        procedure: format!("fwer-two-stage[{}]", method.label()),
        rejected_ids: data.ids_of(&rejected),
        r2: rejected.len(),
        rejected,
        r1: follow.r1,
        primary_threshold: pt,
        followup_threshold: ft,
        effective_q1: Some(alpha1),
        effective_q2: Some(alpha - alpha1),
        partial: follow.r1 > listed.len(),
        per_hypothesis,
        components: Vec::new(),
    })
}

fn bonferroni_scores(
    data: &StudyPairData,
    rows: &[usize],
    m: usize,
    r1: usize,
    c: f64,
) -> Vec<HypothesisScore> {
    rows.iter()
        .filter_map(|&j| {
            let rec = &data.records()[j];
            let p2 = rec.p2?;
            let z = (m as f64 * rec.p1 / c).max(r1 as f64 * p2 / (1.0 - c));
            Some(HypothesisScore {
                index: j,
                id: rec.id.clone(),
                z,
                adjusted_p: z.min(1.0),
            })
        })
        .collect()
}

/// Bonferroni-replicability adjusted p-values
/// min(max(m·p1/c, R1·p2/(1−c)), 1) for every row with a follow-up value,
/// in input order.
pub fn bonf_replicability_adjust(data: &StudyPairData, c: f64) -> Result<Vec<HypothesisScore>> {
    check_ratio(c)?;
    data.ensure_valid()?;
    let rows = data.followed_up_indices();
    Ok(bonferroni_scores(data, &rows, data.m(), data.r1(), c))
}
