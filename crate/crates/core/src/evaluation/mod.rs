//! Evaluation protocol: one stratified train/test split shared by every
//! configuration, k-fold cross-validated grid search on the training part,
//! and ROC/AUC on the held-out part.

mod auc;
mod grid;
mod matrix;
mod split;

pub use auc::{roc_auc, roc_curve, trapezoid_area};
pub use grid::{grid_search, GridOutcome, GridPointRecord, GridSettings, RosterEntry};
pub use matrix::{
    evaluate_matrix, feature_set_display_name, ConfigRecord, ConfigStatus, EvalReport, EvalSettings,
    MatrixOutcome,
};
pub use split::{stratified_kfold, stratified_split, FoldPlan, SplitPlan};
