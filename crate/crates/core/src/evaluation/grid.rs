use serde::{Deserialize, Serialize};

use crate::classifiers::{
    self, predict_score, ClassifierKind, Dataset, ForestParams, GbdtParams, Hyperparams, LogisticParams,
    SvmParams, TrainedModel,
};
use crate::evaluation::{roc_auc, stratified_kfold};
use crate::{par, rng, Error, Result};

/// A classifier family and the grid it is tuned over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub kind: ClassifierKind,
    pub grid: Vec<Hyperparams>,
}

/// Default grids. Tree ensembles take `mtry = ceil(sqrt(D))` unless set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub nb_alphas: Vec<f64>,
    pub svm_lambdas: Vec<f64>,
    pub svm_epochs: usize,
    pub lr_lambdas: Vec<f64>,
    pub lr_epochs: usize,
    pub lr_learning_rate: f64,
    pub lr_tolerance: f64,
    pub rf_trees: usize,
    pub rf_depths: Vec<usize>,
    pub rf_mtry: Option<usize>,
    pub rf_min_leaf: usize,
    pub gbdt_stages: usize,
    pub gbdt_shrinkages: Vec<f64>,
    pub gbdt_depth: usize,
    pub gbdt_min_leaf: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        let lr = LogisticParams::default();
        GridSettings {
            nb_alphas: vec![0.01, 0.1, 1.0],
            svm_lambdas: vec![1e-4, 1e-3, 1e-2, 1e-1],
            svm_epochs: SvmParams::default().epochs,
            lr_lambdas: vec![1e-4, 1e-3, 1e-2, 1e-1],
            lr_epochs: lr.epochs,
            lr_learning_rate: lr.learning_rate,
            lr_tolerance: lr.tolerance,
            rf_trees: 100,
            rf_depths: vec![8, 16],
            rf_mtry: None,
            rf_min_leaf: 1,
            gbdt_stages: 100,
            gbdt_shrinkages: vec![0.05, 0.1],
            gbdt_depth: 3,
            gbdt_min_leaf: 1,
        }
    }
}

impl GridSettings {
    pub fn grid(&self, kind: ClassifierKind) -> Vec<Hyperparams> {
        match kind {
            ClassifierKind::NaiveBayes => {
                self.nb_alphas.iter().map(|&alpha| Hyperparams::NaiveBayes { alpha }).collect()
            }
            ClassifierKind::LinearSvm => self
                .svm_lambdas
                .iter()
                .map(|&l2_lambda| Hyperparams::LinearSvm(SvmParams { l2_lambda, epochs: self.svm_epochs }))
                .collect(),
            ClassifierKind::LogisticRegression => self
                .lr_lambdas
                .iter()
                .map(|&l2_lambda| {
                    Hyperparams::LogisticRegression(LogisticParams {
                        l2_lambda,
                        epochs: self.lr_epochs,
                        learning_rate: self.lr_learning_rate,
                        tolerance: self.lr_tolerance,
                    })
                })
                .collect(),
            ClassifierKind::RandomForest => self
                .rf_depths
                .iter()
                .map(|&max_depth| {
                    Hyperparams::RandomForest(ForestParams {
                        n_trees: self.rf_trees,
                        max_depth,
                        mtry: self.rf_mtry,
                        min_leaf: self.rf_min_leaf,
                    })
                })
                .collect(),
            ClassifierKind::Gbdt => self
                .gbdt_shrinkages
                .iter()
                .map(|&shrinkage| {
                    Hyperparams::Gbdt(GbdtParams {
                        n_stages: self.gbdt_stages,
                        shrinkage,
                        max_depth: self.gbdt_depth,
                        min_leaf: self.gbdt_min_leaf,
                    })
                })
                .collect(),
        }
    }

    pub fn roster(&self, kinds: &[ClassifierKind]) -> Vec<RosterEntry> {
        kinds.iter().map(|&kind| RosterEntry { kind, grid: self.grid(kind) }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointRecord {
    pub params: Hyperparams,
    pub fold_aucs: Vec<f64>,
    pub cv_auc_mean: Option<f64>,
    pub cv_auc_sd: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub best_index: usize,
    pub points: Vec<GridPointRecord>,
    /// Refit on the whole training set with the winning point.
    pub model: TrainedModel,
}

impl GridOutcome {
    pub fn best(&self) -> &GridPointRecord {
        &self.points[self.best_index]
    }
}

fn fold_auc(
    train: &Dataset,
    fit_rows: &[usize],
    val_rows: &[usize],
    params: &Hyperparams,
    seed: u64,
    feature_set: &str,
) -> Result<f64> {
    let fit = train.subset(fit_rows);
    let model = classifiers::train(&fit, params, seed, feature_set)?;
    let scores =
        val_rows.iter().map(|&r| predict_score(&model, &train.vectors()[r])).collect::<Result<Vec<_>>>()?;
    let labels: Vec<bool> = val_rows.iter().map(|&r| train.labels()[r]).collect();
    roc_auc(&scores, &labels)
}

/// Mean and sample standard deviation.
fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// k-fold cross-validated selection over `grid`.
///
/// Every (point, fold) unit trains with its own stream derived from
/// `(seed, point, fold)` and all units run in parallel. A point whose fold
/// fails to train or score is recorded as failed and skipped. The highest
/// mean AUC wins; ties keep the earliest point. The winner is refit on the
/// full training set with `seed`.
pub fn grid_search(
    train: &Dataset,
    grid: &[Hyperparams],
    k: usize,
    seed: u64,
    feature_set: &str,
) -> Result<GridOutcome> {
    if grid.is_empty() {
        return Err(Error::Contract("grid search needs at least one grid point".into()));
    }
    let plan = stratified_kfold(train.labels(), k, seed)?;
    let fits: Vec<Vec<usize>> = (0..k).map(|f| plan.training_positions(f)).collect();
    let units = par::map_range(grid.len() * k, |u| {
        let (p, f) = (u / k, u % k);
        let unit_seed = rng::derive(seed, &[p as u64, f as u64]);
        fold_auc(train, &fits[f], &plan.folds[f], &grid[p], unit_seed, feature_set)
    });

    let mut points = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (p, params) in grid.iter().enumerate() {
        let results = &units[p * k..(p + 1) * k];
        let record = match results.iter().position(|r| r.is_err()) {
            Some(f) => GridPointRecord {
                params: params.clone(),
                fold_aucs: Vec::new(),
                cv_auc_mean: None,
                cv_auc_sd: None,
                error: results[f].as_ref().err().map(|e| format!("fold {f}: {e}")),
            },
            None => {
                let aucs: Vec<f64> = results.iter().map(|r| *r.as_ref().unwrap()).collect();
                let (mean, sd) = mean_sd(&aucs);
                if best.is_none_or(|(_, b)| mean > b) {
                    best = Some((p, mean));
                }
                GridPointRecord {
                    params: params.clone(),
                    fold_aucs: aucs,
                    cv_auc_mean: Some(mean),
                    cv_auc_sd: Some(sd),
                    error: None,
                }
            }
        };
        points.push(record);
    }

    let Some((best_index, _)) = best else {
        let first = points[0].error.clone().unwrap_or_default();
        return Err(Error::Evaluation(format!(
            "every grid point failed ({} points); first failure: {first}",
            points.len()
        )));
    };
    let model = classifiers::train(train, &grid[best_index], seed, feature_set)?;
    Ok(GridOutcome { best_index, points, model })
}
