//! Replicability procedures over the family of no-replicability nulls
//! H_NR,j: "hypothesis j is null in at least one of the two studies".
//!
//! * [`fwer_two_stage`]: FWER at α1 in the primary study and α − α1 in the
//!   follow-up study, intersected.
//! * [`fdr_two_stage`]: the joint step-up over the follow-up set, with the
//!   dependence modifications of [`DependenceMode`].
//! * [`fdr_symmetric`]: union of the two directed runs weighted by w1.
//! * [`oracle_calibrated_run`]: the two-stage run at (q', 2q') for known
//!   null fractions.
//! * Baselines: partial conjunction, naive BH-BH, Fisher meta-analysis.
//!
//! Every procedure returns rows in input order. When a dataset declares a
//! follow-up set larger than its listed rows, thresholds use the declared
//! size and the unlisted members are never rejected; adjusted values are
//! then upper bounds and the report is flagged `partial`.

mod baselines;
mod fdr;
mod fwer;

pub use baselines::{baseline_fisher_meta, baseline_naive_bh_bh, baseline_partial_conjunction, Study};
pub use fdr::{fdr_replicability_adjust, fdr_symmetric, fdr_two_stage, oracle_calibrated_run};
pub use fwer::{bonf_replicability_adjust, fwer_two_stage, FwerMethod};

pub use crate::types::DependenceMode;
