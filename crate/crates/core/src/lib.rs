//! Two-stage replicability analysis for a primary and a follow-up study.
//!
//! A hypothesis is a replicability discovery when it is non-null in both
//! studies. The procedures here test the no-replicability nulls "null in at
//! least one study" with FWER or FDR control, using the primary study to
//! select which hypotheses are followed up.
//!
//! ```
//! use replicability::procedures::{fdr_two_stage, DependenceMode};
//! use replicability::selection::SelectionRule;
//! use replicability::types::StudyPairData;
//!
//! let data = StudyPairData::from_pairs([
//!     ("a", 1e-6, 0.001),
//!     ("b", 2e-4, 0.02),
//!     ("c", 0.3, 0.9),
//! ]);
//! let rule = SelectionRule::BhAtLevel(0.025);
//! let report = fdr_two_stage(&data, &rule, 0.025, 0.05, DependenceMode::Independent).unwrap();
//! assert_eq!(report.rejected_ids, ["a", "b"]);
//! ```

pub mod adjust;
pub mod cli;
pub mod error;
pub mod io;
pub mod numeric;
pub mod procedures;
pub mod selection;
pub mod sim;
pub mod types;

pub use error::{ReplError, Result};
pub use types::{DiscoveryReport, HypothesisRecord, StudyPairData};
