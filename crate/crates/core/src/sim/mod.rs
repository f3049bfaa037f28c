//! Monte-Carlo engine for the two-study normal model.
//!
//! Study i draws X_ij ~ N(μ_ij, σ_i²) with μ_ij = μ_i on non-null
//! hypotheses and 0 otherwise, and reports p_ij = 1 − Φ(X_ij / σ_i). Truth
//! labels are laid out in contiguous blocks I00, I01, I10, I11 whose sizes
//! are the largest-remainder rounding of f·m.
//!
//! Every (repetition, study, block) has its own ChaCha8 stream derived from
//! the master seed, and results are aggregated in repetition order, so a
//! scenario gives bit-identical estimates on any number of threads.

mod power;
mod rng;

use rayon::prelude::*;

use crate::error::{ReplError, Result};
use crate::numeric::{solve_oracle_qprime, std_normal_sf};
use crate::procedures::{
    baseline_fisher_meta, baseline_naive_bh_bh, baseline_partial_conjunction, fdr_symmetric,
    fdr_two_stage, fwer_two_stage, oracle_calibrated_run, DependenceMode, FwerMethod, Study,
};
use crate::selection::SelectionRule;
use crate::types::{DiscoveryReport, HypothesisRecord, StudyPairData, TruthAssignment, TruthLabel};

pub use power::{analytic_power_bonf_max, analytic_power_two_stage};
pub use rng::{normal_draw, stream_rng, MAX_REPS};

/// How the follow-up set is chosen inside a simulated run.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SimSelection {
    /// BH at the run's primary level (w·q1 per direction for the symmetric
    /// procedure), or Bonferroni at α1 for the FWER procedure.
    #[default]
    Natural,
    Rule(SelectionRule),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimProcedure {
    TwoStageFdr { q1: f64, q: f64, mode: DependenceMode, selection: SimSelection },
    Symmetric { w1: f64, q1: f64, q: f64, selection: SimSelection },
    TwoStageFwer { alpha1: f64, alpha: f64, method: FwerMethod, selection: SimSelection },
    PartialConjunction { q: f64 },
    NaiveBhBh { q: f64, primary: Study },
    /// Two-stage FDR at (q', 2q') with q' from the realized null fractions.
    Oracle { q: f64, w1: f64 },
    FisherMeta { q: f64 },
}

impl SimProcedure {
    pub fn label(&self) -> String {
        match self {
            SimProcedure::TwoStageFdr { q1, q, mode, .. } => format!("fdr(q1={q1},q={q},{})", mode.label()),
            SimProcedure::Symmetric { w1, q1, q, .. } => format!("symmetric(w1={w1},q1={q1},q={q})"),
            SimProcedure::TwoStageFwer { alpha1, alpha, method, .. } => {
                format!("fwer(alpha1={alpha1},alpha={alpha},{})", method.label())
            }
            SimProcedure::PartialConjunction { q } => format!("partial-conjunction(q={q})"),
            SimProcedure::NaiveBhBh { q, primary } => format!("naive(q={q},{primary:?})"),
            SimProcedure::Oracle { q, w1 } => format!("oracle(q={q},w1={w1})"),
            SimProcedure::FisherMeta { q } => format!("fisher(q={q})"),
        }
    }

    fn selection_mut(&mut self) -> Option<&mut SimSelection> {
        match self {
            SimProcedure::TwoStageFdr { selection, .. }
            | SimProcedure::Symmetric { selection, .. }
            | SimProcedure::TwoStageFwer { selection, .. } => Some(selection),
            _ => None,
        }
    }

    fn run(&self, data: &StudyPairData, truth_counts: [usize; 4]) -> Result<DiscoveryReport> {
        let rule_or = |s: &SimSelection, natural: f64| match s {
            SimSelection::Natural => SelectionRule::BhAtLevel(natural),
            SimSelection::Rule(r) => r.clone(),
        };
        match self {
            SimProcedure::TwoStageFdr { q1, q, mode, selection } => {
                fdr_two_stage(data, &rule_or(selection, *q1), *q1, *q, *mode)
            }
            SimProcedure::Symmetric { w1, q1, q, selection } => {
                // a zero-weight direction is never run, so its level is moot
                let forward = rule_or(selection, (w1 * q1).max(f64::MIN_POSITIVE));
                let backward = rule_or(selection, ((1.0 - w1) * q1).max(f64::MIN_POSITIVE));
                fdr_symmetric(data, &forward, &backward, *w1, *q1, *q, DependenceMode::Independent)
            }
            SimProcedure::TwoStageFwer { alpha1, alpha, method, selection } => {
                let rule = match selection {
                    SimSelection::Natural => SelectionRule::BonferroniThreshold(*alpha1),
                    SimSelection::Rule(r) => r.clone(),
                };
                fwer_two_stage(data, &rule, *alpha1, *alpha, *method)
            }
            SimProcedure::PartialConjunction { q } => baseline_partial_conjunction(data, *q),
            SimProcedure::NaiveBhBh { q, primary } => baseline_naive_bh_bh(data, *q, *primary),
            SimProcedure::Oracle { q, w1 } => {
                let m = data.m() as f64;
                let f00 = truth_counts[0] as f64 / m;
                // the cross term belongs to hypotheses null in the primary study only
                let f_cross = if *w1 == 1.0 {
                    truth_counts[1]
                } else if *w1 == 0.0 {
                    truth_counts[2]
                } else {
                    truth_counts[1].max(truth_counts[2])
                } as f64
                    / m;
                let qp = solve_oracle_qprime(f00, f_cross, *q, *w1)?;
                let level = if *w1 == 0.5 { qp / 2.0 } else { qp };
                let rule = SelectionRule::BhAtLevel(level);
                oracle_calibrated_run(data, &rule, f00, f_cross, *q, *w1)
            }
            SimProcedure::FisherMeta { q } => baseline_fisher_meta(data, *q),
        }
    }
}

/// Sample-size allocation: σ1 = σ/√(ζN), σ2 = σ/√((1−ζ)N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub sigma: f64,
    pub zeta: f64,
    pub n: f64,
}

impl Allocation {
    pub fn sigmas(&self) -> (f64, f64) {
        (
            self.sigma / (self.zeta * self.n).sqrt(),
            self.sigma / ((1.0 - self.zeta) * self.n).sqrt(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub m: usize,
    /// Fractions of I00, I01, I10, I11.
    pub fractions: [f64; 4],
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// When set, overrides `sigma1` and `sigma2`.
    pub allocation: Option<Allocation>,
    pub procedure: SimProcedure,
    pub reps: usize,
    pub seed: u64,
    pub keep_trace: bool,
}

impl SimScenario {
    pub fn new(
        m: usize,
        fractions: [f64; 4],
        (mu1, mu2): (f64, f64),
        (sigma1, sigma2): (f64, f64),
        procedure: SimProcedure,
        reps: usize,
        seed: u64,
    ) -> Result<Self> {
        let s = SimScenario {
            m,
            fractions,
            mu1,
            mu2,
            sigma1,
            sigma2,
            allocation: None,
            procedure,
            reps,
            seed,
            keep_trace: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn sigmas(&self) -> (f64, f64) {
        self.allocation.map_or((self.sigma1, self.sigma2), |a| a.sigmas())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(ReplError::Config("m must be positive".into()));
        }
        if self.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(ReplError::Config(format!("fractions must lie in [0, 1], got {:?}", self.fractions)));
        }
        let total: f64 = self.fractions.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ReplError::Config(format!("fractions must sum to 1, got {total}")));
        }
        if let Some(a) = self.allocation {
            if !(a.zeta > 0.0 && a.zeta < 1.0) || !(a.sigma > 0.0) || !(a.n > 0.0) {
                return Err(ReplError::Config(format!(
                    "allocation needs sigma > 0, N > 0 and zeta in (0, 1), got {a:?}"
                )));
            }
        }
        let (s1, s2) = self.sigmas();
        if !(s1 > 0.0 && s2 > 0.0 && s1.is_finite() && s2.is_finite()) {
            return Err(ReplError::Config(format!("sigmas must be positive, got ({s1}, {s2})")));
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite()) {
            return Err(ReplError::Config("means must be finite".into()));
        }
        if self.reps == 0 || self.reps > MAX_REPS {
            return Err(ReplError::Config(format!("reps must lie in [1, 2^48], got {}", self.reps)));
        }
        Ok(())
    }

    /// Block sizes |I00|, |I01|, |I10|, |I11|.
    pub fn truth_counts(&self) -> [usize; 4] {
        largest_remainder(self.m, self.fractions)
    }
}

/// Rounds f·m to integers summing to m: floors first, then one extra unit to
/// each of the largest remainders, ties in block order.
pub fn largest_remainder(m: usize, fractions: [f64; 4]) -> [usize; 4] {
    let exact = fractions.map(|f| f * m as f64);
    let mut counts = exact.map(|x| x.floor() as usize);
    let assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(m.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// One simulated dataset and its truth. Ids are "h0", "h1", ... in block
/// order.
pub fn generate_rep(scenario: &SimScenario, rep: usize) -> (StudyPairData, TruthAssignment) {
    let counts = scenario.truth_counts();
    let truth = TruthAssignment::from_counts(counts);
    let (s1, s2) = scenario.sigmas();
    let shift1 = scenario.mu1 / s1;
    let shift2 = scenario.mu2 / s2;
    let mut p1 = Vec::with_capacity(scenario.m);
    let mut p2 = Vec::with_capacity(scenario.m);
    for (block, &n) in counts.iter().enumerate() {
        let label = [TruthLabel::I00, TruthLabel::I01, TruthLabel::I10, TruthLabel::I11][block];
        let mut g1 = stream_rng(scenario.seed, rep, 0, block as u8);
        let mut g2 = stream_rng(scenario.seed, rep, 1, block as u8);
        let d1 = if label.primary_non_null() { shift1 } else { 0.0 };
        let d2 = if label.followup_non_null() { shift2 } else { 0.0 };
        for _ in 0..n {
            p1.push(std_normal_sf(d1 + normal_draw(&mut g1)));
            p2.push(std_normal_sf(d2 + normal_draw(&mut g2)));
        }
    }
    let records = p1
        .into_iter()
        .zip(p2)
        .enumerate()
        .map(|(j, (a, b))| HypothesisRecord::new(format!("h{j}"), a, Some(b)))
        .collect();
    (StudyPairData::new(records, None, None), truth)
}

/// Per-repetition counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepOutcome {
    pub rejections: usize,
    /// Rejected no-replicability nulls (V).
    pub false_rejections: usize,
    /// Rejected members of I11.
    pub true_rejections: usize,
}

impl RepOutcome {
    pub fn fdp(&self) -> f64 {
        self.false_rejections as f64 / self.rejections.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub reps: usize,
    pub avg_fdp: f64,
    pub fdp_se: Option<f64>,
    /// Absent when I11 is empty.
    pub avg_power: Option<f64>,
    pub power_se: Option<f64>,
    pub avg_rejections: f64,
    /// Fraction of repetitions with at least one false rejection.
    pub fwer: f64,
    pub fwer_se: Option<f64>,
    pub trace: Option<Vec<RepOutcome>>,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, Option<f64>) {
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (mean, Some((ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()))
}

fn run_rep(scenario: &SimScenario, rep: usize) -> Result<RepOutcome> {
    let (data, truth) = generate_rep(scenario, rep);
    let report = scenario.procedure.run(&data, truth.counts())?;
    let labels = truth.labels();
    let false_rejections = report.rejected.iter().filter(|&&j| labels[j].no_replicability_null()).count();
    Ok(RepOutcome {
        rejections: report.rejected.len(),
        false_rejections,
        true_rejections: report.rejected.len() - false_rejections,
    })
}

/// Runs every repetition (in parallel) and aggregates in repetition order.
pub fn run_scenario(scenario: &SimScenario) -> Result<SimEstimate> {
    scenario.validate()?;
    let outcomes: Vec<Result<RepOutcome>> = (0..scenario.reps)
        .into_par_iter()
        .map(|rep| run_rep(scenario, rep))
        .collect();
    let mut trace = Vec::with_capacity(outcomes.len());
    for (rep, o) in outcomes.into_iter().enumerate() {
        trace.push(o.map_err(|e| ReplError::Repetition { rep, source: Box::new(e) })?);
    }
    let n = trace.len();
    let (avg_fdp, fdp_se) = mean_se(trace.iter().map(RepOutcome::fdp), n);
    let n11 = scenario.truth_counts()[3];
    let (avg_power, power_se) = if n11 == 0 {
        (None, None)
    } else {
        let (p, se) = mean_se(trace.iter().map(|o| o.true_rejections as f64 / n11 as f64), n);
        (Some(p), se)
    };
    let avg_rejections = trace.iter().map(|o| o.rejections as f64).sum::<f64>() / n as f64;
    let (fwer, fwer_se) = mean_se(trace.iter().map(|o| f64::from(u8::from(o.false_rejections > 0))), n);
    Ok(SimEstimate {
        reps: n,
        avg_fdp,
        fdp_se,
        avg_power,
        power_se,
        avg_rejections,
        fwer,
        fwer_se,
        trace: scenario.keep_trace.then_some(trace),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// μ1 = μ2 = value.
    Mu,
    /// q1 = value·q (α1 = value·α for the FWER procedure).
    C,
    W1,
    /// Allocation fraction; needs an allocation in the template.
    Zeta,
    /// Top-k selection with k = value.
    KSelected,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Mu => "mu",
            SweepAxis::C => "c",
            SweepAxis::W1 => "w1",
            SweepAxis::Zeta => "zeta",
            SweepAxis::KSelected => "k_selected",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mu" => SweepAxis::Mu,
            "c" => SweepAxis::C,
            "w1" => SweepAxis::W1,
            "zeta" => SweepAxis::Zeta,
            "k_selected" | "k" => SweepAxis::KSelected,
            _ => return None,
        })
    }

    /// The template with this axis set to `value`.
    pub fn apply(self, template: &SimScenario, value: f64) -> Result<SimScenario> {
        let mut s = template.clone();
        let unsupported = || {
            ReplError::Config(format!(
                "sweep axis '{}' does not apply to procedure {}",
                self.label(),
                template.procedure.label()
            ))
        };
        match self {
            SweepAxis::Mu => {
                s.mu1 = value;
                s.mu2 = value;
            }
            SweepAxis::C => match &mut s.procedure {
                SimProcedure::TwoStageFdr { q1, q, .. } | SimProcedure::Symmetric { q1, q, .. } => {
                    *q1 = value * *q
                }
                SimProcedure::TwoStageFwer { alpha1, alpha, .. } => *alpha1 = value * *alpha,
                _ => return Err(unsupported()),
            },
            SweepAxis::W1 => match &mut s.procedure {
                SimProcedure::Symmetric { w1, .. } | SimProcedure::Oracle { w1, .. } => *w1 = value,
                _ => return Err(unsupported()),
            },
            SweepAxis::Zeta => match &mut s.allocation {
                Some(a) => a.zeta = value,
                None => {
                    return Err(ReplError::Config(
                        "sweep over zeta needs sigma, zeta and N in the scenario".into(),
                    ))
                }
            },
            SweepAxis::KSelected => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(ReplError::Config(format!("k must be a positive integer, got {value}")));
                }
                let sel = s.procedure.selection_mut().ok_or_else(unsupported)?;
                *sel = SimSelection::Rule(SelectionRule::TopK(value as usize));
            }
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub estimate: SimEstimate,
}

/// One [`run_scenario`] per grid value, all with the template's master seed.
pub fn sweep(template: &SimScenario, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(ReplError::Config("sweep grid is empty".into()));
    }
    grid.iter()
        .map(|&value| {
            let s = axis.apply(template, value)?;
            Ok(SweepPoint { value, estimate: run_scenario(&s)? })
        })
        .collect()
}
