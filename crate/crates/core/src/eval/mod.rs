//! Experimental protocol: seeded k-fold cross-validation with per-fold
//! scaling, exhaustive grid search, accuracy metrics and the group
//! statistics.

mod cv;
mod grid;
mod metrics;
mod stats;

pub use cv::{
    fold_seed, kfold_split, prepare_fold, run_cv, run_cv_with, stratified_kfold_split, CVResult,
    FoldPlan, FoldScore, PreparedFold,
};
pub use grid::{grid_search, report_order, select_best, GridSpec};
pub use metrics::{accuracy, mean, precision, recall, sample_sd};
pub use stats::{
    group_compare, kolmogorov_q, ks_normality, ks_statistic, ks_two_sample, t_test_independent,
    GroupComparison, GroupStats, StatTestResult,
};
