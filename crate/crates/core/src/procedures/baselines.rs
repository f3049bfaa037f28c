//! Comparison procedures: partial conjunction (BH on maximum p-values), the
//! naive sequential BH-BH procedure, and Fisher meta-analysis.

use crate::error::{ReplError, Result};
use crate::numeric::fisher_combined_pvalue;
use crate::selection::{bh_adjust, bh_cutoff, bh_reject_with_m};
use crate::types::{DiscoveryReport, HypothesisScore, StudyPairData};

/// Which study plays the primary role in the naive baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    One,
    Two,
}

fn complete_columns(data: &StudyPairData) -> Result<(Vec<f64>, Vec<f64>)> {
    data.ensure_valid()?;
    data.require_complete()?;
    let p1 = data.p1_values();
    let p2 = data.records().iter().map(|r| r.p2.unwrap_or(1.0)).collect();
    Ok((p1, p2))
}

fn bh_report(data: &StudyPairData, name: &str, combined: &[f64], q: f64) -> Result<DiscoveryReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(ReplError::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    let m = data.m();
    let rejected = bh_reject_with_m(combined, q, m);
    let adjusted = bh_adjust(combined, m);
    let per_hypothesis = combined
        .iter()
        .zip(&adjusted)
        .enumerate()
        .map(|(index, (&z, &adjusted_p))| HypothesisScore {
            index,
            id: data.records()[index].id.clone(),
            z,
            adjusted_p,
        })
        .collect();
    Ok(DiscoveryReport {
        procedure: name.to_string(),
        rejected_ids: data.ids_of(&rejected),
        r2: rejected.len(),
        r1: data.len(),
        primary_threshold: bh_cutoff(combined, q, m),
        rejected,
        per_hypothesis,
        ..Default::default()
    })
}

/// BH at level q on max(p1, p2).
pub fn baseline_partial_conjunction(data: &StudyPairData, q: f64) -> Result<DiscoveryReport> {
    let (p1, p2) = complete_columns(data)?;
    let maxima: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a.max(*b)).collect();
    bh_report(data, "partial-conjunction", &maxima, q)
}

/// BH at q on the primary study, then BH at q on the other study restricted
/// to the primary rejections. Does not control the FDR over the
/// no-replicability nulls.
pub fn baseline_naive_bh_bh(data: &StudyPairData, q: f64, primary: Study) -> Result<DiscoveryReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(ReplError::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    let (p1, p2) = complete_columns(data)?;
    let (first, second) = match primary {
        Study::One => (p1, p2),
        Study::Two => (p2, p1),
    };
    let stage1 = bh_reject_with_m(&first, q, data.m());
    let restricted: Vec<f64> = stage1.iter().map(|&j| second[j]).collect();
    let rejected: Vec<usize> = bh_reject_with_m(&restricted, q, restricted.len())
        .into_iter()
        .map(|i| stage1[i])
        .collect();
    Ok(DiscoveryReport {
        procedure: format!("naive-bh-bh[{primary:?}]"),
        rejected_ids: data.ids_of(&rejected),
        r2: rejected.len(),
        r1: stage1.len(),
        rejected,
        ..Default::default()
    })
}

/// Fisher's combination of the two p-values followed by BH at q. Controls
/// the FDR over the global nulls only.
pub fn baseline_fisher_meta(data: &StudyPairData, q: f64) -> Result<DiscoveryReport> {
    let (p1, p2) = complete_columns(data)?;
    let combined: Vec<f64> = p1
        .iter()
        .zip(&p2)
        .map(|(&a, &b)| fisher_combined_pvalue(a, b))
        .collect();
    bh_report(data, "fisher-meta", &combined, q)
}
