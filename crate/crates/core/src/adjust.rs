//! Ranked adjusted-p-value tables for both adjustment flavors, with the
//! harmonic pre-scaling of p1 used under arbitrary primary-study dependence.

use std::cmp::Ordering;

use crate::error::{ReplError, Result};
use crate::numeric::harmonic;
use crate::procedures::{bonf_replicability_adjust, fdr_replicability_adjust};
use crate::types::{check_ratio, DependenceMode, HypothesisRecord, HypothesisScore, StudyPairData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustFlavor {
    Bonferroni,
    Fdr,
}

impl AdjustFlavor {
    pub fn label(self) -> &'static str {
        match self {
            AdjustFlavor::Bonferroni => "bonferroni",
            AdjustFlavor::Fdr => "fdr",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedRow {
    pub id: String,
    pub p1: f64,
    pub p2: f64,
    pub z: f64,
    pub adjusted_p: f64,
    /// Adjusted value after the dependence pre-scaling, when the mode has one.
    pub adjusted_p_modified: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedTable {
    pub rows: Vec<AdjustedRow>,
    pub m: usize,
    pub r1: usize,
    pub c: f64,
    pub flavor: AdjustFlavor,
    pub mode: DependenceMode,
}

impl AdjustedTable {
    /// Ids whose adjusted value is at most `level`, in table order.
    pub fn rejected_at(&self, level: f64) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.adjusted_p <= level)
            .map(|r| r.id.as_str())
            .collect()
    }

    /// Same as [`rejected_at`](Self::rejected_at) on the modified column.
    pub fn rejected_modified_at(&self, level: f64) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.adjusted_p_modified.is_some_and(|a| a <= level))
            .map(|r| r.id.as_str())
            .collect()
    }
}

fn adjust_with(data: &StudyPairData, c: f64, flavor: AdjustFlavor) -> Result<Vec<HypothesisScore>> {
    match flavor {
        AdjustFlavor::Bonferroni => bonf_replicability_adjust(data, c),
        AdjustFlavor::Fdr => fdr_replicability_adjust(data, c),
    }
}

fn prescaled(data: &StudyPairData, f1: f64, f2: f64) -> StudyPairData {
    let records = data
        .records()
        .iter()
        .map(|r| HypothesisRecord {
            id: r.id.clone(),
            p1: (r.p1 * f1).min(1.0),
            p2: r.p2.map(|p| (p * f2).min(1.0)),
        })
        .collect();
    StudyPairData::new(records, data.m_declared(), data.r1_declared())
}

/// Adjusted p-values over the followed-up rows, sorted ascending by adjusted
/// value with ties broken by id.
///
/// Under `ArbitraryPrimaryItem1` the extra column recomputes the adjustment
/// with p1 replaced by min(H_m·p1, 1); under `ArbitraryBoth { t: None }` p2
/// is also replaced by min(H_R1·p2, 1). The thresholded modifications have
/// no level-free adjusted value and are refused.
pub fn build_adjusted_table(
    data: &StudyPairData,
    c: f64,
    flavor: AdjustFlavor,
    mode: DependenceMode,
) -> Result<AdjustedTable> {
    check_ratio(c)?;
    let base = adjust_with(data, c, flavor)?;
    let scale = match mode {
        DependenceMode::Independent | DependenceMode::PrdsFollowup => None,
        DependenceMode::ArbitraryPrimaryItem1 => Some((harmonic(data.m())?, 1.0)),
        DependenceMode::ArbitraryBoth { t: None } => {
            Some((harmonic(data.m())?, harmonic(data.r1().max(1))?))
        }
        DependenceMode::ArbitraryPrimaryItem2 { .. } | DependenceMode::ArbitraryBoth { t: Some(_) } => {
            return Err(ReplError::Config(format!(
                "dependence mode '{}' depends on q and has no adjusted-value table; use analyze",
                mode.label()
            )))
        }
    };
    let modified = match scale {
        Some((f1, f2)) => {
            let mut by_index = vec![None; data.len()];
            for s in adjust_with(&prescaled(data, f1, f2), c, flavor)? {
                by_index[s.index] = Some(s.adjusted_p);
            }
            by_index
        }
        None => vec![None; data.len()],
    };
    let mut rows: Vec<AdjustedRow> = base
        .into_iter()
        .map(|s| {
            let rec = &data.records()[s.index];
            AdjustedRow {
                id: s.id,
                p1: rec.p1,
                p2: rec.p2.unwrap_or(f64::NAN),
                z: s.z,
                adjusted_p: s.adjusted_p,
                adjusted_p_modified: modified[s.index],
            }
        })
        .collect();
    rows.sort_by(|a, b| match a.adjusted_p.total_cmp(&b.adjusted_p) {
        Ordering::Equal => a.id.cmp(&b.id),
        o => o,
    });
    Ok(AdjustedTable {
        rows,
        m: data.m(),
        r1: data.r1(),
        c,
        flavor,
        mode,
    })
}
