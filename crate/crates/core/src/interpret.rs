//! Feature importance from monomial coefficients, the interpretability
//! metrics, perturbation analysis and the sparsity sweep.

mod estimators;
mod metrics;
mod perturbation;
mod ranking;
mod sweep;

pub use estimators::{accuracy, auc, LinearRegression, LogisticRegression};
pub use metrics::{
    cosine_similarity, feature_overlap_ratio, interpretability_metrics, ranking_similarity,
    spearman_rho, value_similarity, MetricBundle, ValueSimilarity,
};
pub use perturbation::{perturbation_analysis, PerturbationConfig, PerturbationRow, PerturbationTable};
pub use ranking::{rank_features, rank_polynomial, ImportanceEntry, ImportanceReport};
pub use sweep::{
    sparsity_accuracy_sweep, term_feature_matrix, SweepMetric, SweepPoint, SweepResult,
};
