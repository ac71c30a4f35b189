//! Shallow rule trees over ranked monomial terms for early warning, their
//! classification metrics and consecutive-alarm horizons.

mod metrics;
mod rules;
mod tree;

pub use metrics::{consecutive_warning_horizon, evaluate_warning, metrics_from_counts, WarningEpisode, WarningMetrics};
pub use rules::{parse_rules, render_rules};
pub use tree::{build_warning_tree, pool_from_report, Node, PoolTerm, WarningTree, DEFAULT_MIN_LEAF};
