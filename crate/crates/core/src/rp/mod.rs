//! Revealed-preference engine.
//!
//! All tests consume only the cross-evaluation table `gbar[t][s][i]`, so they
//! accept anything implementing [`AsGbar`](crate::model::AsGbar): a full
//! [`RpDataset`](crate::model::RpDataset) or a bare
//! [`GbarTable`](crate::model::GbarTable).

mod afriat;
mod bound;
mod garp;
mod rank;
mod utility;

pub use afriat::{afriat_feasible, agent_gap, empirical_pareto_gap, pareto_gap, pareto_gap_with, GapResult};
pub use bound::hoeffding_confidence;
pub use garp::{ccei_scalar, garp_f, garp_f_threshold, mm_garp, mm_garp_variant, transitive_closure, MmGarpVariant};
pub use rank::{rank_optimality_check, PreferenceProfile};
pub use utility::{reconstruct_utility, ReconstructedUtility};
