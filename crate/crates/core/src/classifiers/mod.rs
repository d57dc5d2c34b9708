//! The five learners and their common scoring surface.
//!
//! All trainers take a [`Dataset`] plus family-specific [`Hyperparams`] and
//! return a model whose [`predict_score`] is monotone in the estimated
//! readmission probability. Scores are for ranking; none are calibrated.

mod forest;
mod gbdt;
mod importance;
mod linear;
mod model;
mod nb;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crate::sparse::{Dataset, SparseVector};
pub use forest::{train_random_forest, ForestModel, ForestParams};
pub use gbdt::{train_gbdt, GbdtModel, GbdtParams};
pub use importance::{feature_importance, FeatureImportance};
pub use linear::{
    logistic_gradient, logistic_objective, train_linear_svm, train_logistic_regression, LinearFamily,
    LinearModel, LogisticParams, SvmParams,
};
pub use model::{predict_score, Model, ModelMetadata, TrainedModel, MODEL_FORMAT_VERSION};
pub use nb::{train_naive_bayes, NbModel};
pub use tree::Tree;

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    NaiveBayes,
    LinearSvm,
    LogisticRegression,
    RandomForest,
    Gbdt,
}

impl ClassifierKind {
    /// Report order: benchmark first, then linear, then ensembles.
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::LinearSvm,
        ClassifierKind::LogisticRegression,
        ClassifierKind::RandomForest,
        ClassifierKind::Gbdt,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Gbdt => "gbdt",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "Naive Bayes",
            ClassifierKind::LinearSvm => "LinearSVM",
            ClassifierKind::LogisticRegression => "Logistic Regression",
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::Gbdt => "Gradient Boosting Decision Trees",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.slug() == norm)
            .or(match norm.as_str() {
                "nb" => Some(ClassifierKind::NaiveBayes),
                "svm" => Some(ClassifierKind::LinearSvm),
                "lr" | "logistic" => Some(ClassifierKind::LogisticRegression),
                "rf" | "forest" => Some(ClassifierKind::RandomForest),
                _ => None,
            })
            .ok_or_else(|| format!("unknown classifier {s:?}"))
    }
}

/// One point in a family's hyperparameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Hyperparams {
    NaiveBayes { alpha: f64 },
    LinearSvm(SvmParams),
    LogisticRegression(LogisticParams),
    RandomForest(ForestParams),
    Gbdt(GbdtParams),
}

impl Hyperparams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparams::NaiveBayes { .. } => ClassifierKind::NaiveBayes,
            Hyperparams::LinearSvm(_) => ClassifierKind::LinearSvm,
            Hyperparams::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Hyperparams::RandomForest(_) => ClassifierKind::RandomForest,
            Hyperparams::Gbdt(_) => ClassifierKind::Gbdt,
        }
    }

    /// Compact `key=value` rendering for reports.
    pub fn describe(&self) -> String {
        match self {
            Hyperparams::NaiveBayes { alpha } => format!("alpha={alpha}"),
            Hyperparams::LinearSvm(p) => format!("l2_lambda={} epochs={}", p.l2_lambda, p.epochs),
            Hyperparams::LogisticRegression(p) => format!(
                "l2_lambda={} epochs={} learning_rate={} tolerance={}",
                p.l2_lambda, p.epochs, p.learning_rate, p.tolerance
            ),
            Hyperparams::RandomForest(p) => format!(
                "n_trees={} max_depth={} mtry={} min_leaf={}",
                p.n_trees,
                p.max_depth,
                p.mtry.map_or_else(|| "sqrt".to_string(), |m| m.to_string()),
                p.min_leaf
            ),
            Hyperparams::Gbdt(p) => format!(
                "n_stages={} shrinkage={} max_depth={} min_leaf={}",
                p.n_stages, p.shrinkage, p.max_depth, p.min_leaf
            ),
        }
    }
}

/// Trains the family named by `params`. `seed` drives every random choice.
pub fn train(data: &Dataset, params: &Hyperparams, seed: u64, feature_set: &str) -> Result<TrainedModel> {
    let model = match params {
        Hyperparams::NaiveBayes { alpha } => Model::NaiveBayes(train_naive_bayes(data, *alpha)?),
        Hyperparams::LinearSvm(p) => Model::Linear(train_linear_svm(data, p, seed)?),
        Hyperparams::LogisticRegression(p) => Model::Linear(train_logistic_regression(data, p)?),
        Hyperparams::RandomForest(p) => Model::Forest(train_random_forest(data, p, seed)?),
        Hyperparams::Gbdt(p) => Model::Gbdt(train_gbdt(data, p, seed)?),
    };
    Ok(TrainedModel {
        metadata: ModelMetadata {
            feature_set: feature_set.to_string(),
            settings: params.clone(),
            seed,
            dimension: data.dimension(),
        },
        model,
    })
}
