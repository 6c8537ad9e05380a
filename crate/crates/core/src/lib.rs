//! Feature selection driven by crowding distance.
//!
//! Features are treated as points and samples as objectives: every sample row
//! orders the features by value, and a feature that sits in a sparse region
//! of many rows (or on their boundary) is preferred. The resulting ranking
//! drives a top-k filter and a greedy forward wrapper. Baseline scorers
//! (Pearson, ReliefF, variance), a k-NN / linear SVM evaluation harness with
//! stratified cross-validation, and a rank-sum test complete the toolkit.

pub mod cli;
pub mod crowding;
pub mod data;
pub mod eval;
pub mod rankers;
pub mod selection;
pub mod stats;

pub use crowding::{crowding_scores, rank_descending, CrowdingScore, FeatureRanking, RankKey};
pub use data::{Dataset, LabelColumn, Matrix, Scaler};
pub use eval::{
    cv_accuracy, repeated_eval, stratified_folds, ClassifierConfig, ClassifierKind, EvalConfig,
    EvalReport, FoldAssignment,
};
pub use rankers::{Method, ScoreVector};
pub use selection::{filter_select, wrapper_select, SelectionResult};
pub use stats::{summary_stats, wilcoxon_rank_sum, Summary, TestOutcome};

/// Version string embedded in every report manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
