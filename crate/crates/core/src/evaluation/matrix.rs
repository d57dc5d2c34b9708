use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifiers::{predict_score, ClassifierKind, Dataset, Hyperparams, TrainedModel};
use crate::evaluation::{grid_search, roc_auc, roc_curve, stratified_split, GridPointRecord, RosterEntry};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub split_ratio: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings { split_ratio: 0.7, folds: 5, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub classifier: ClassifierKind,
    pub feature_set: String,
    pub status: ConfigStatus,
    pub best_params: Option<Hyperparams>,
    pub cv_auc_mean: Option<f64>,
    pub cv_auc_sd: Option<f64>,
    pub test_auc: Option<f64>,
    pub error: Option<String>,
    pub grid: Vec<GridPointRecord>,
    pub roc: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub split_ratio: f64,
    pub folds: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train_positives: usize,
    pub test_positives: usize,
    pub feature_sets: Vec<String>,
    pub classifiers: Vec<ClassifierKind>,
    pub rows: Vec<ConfigRecord>,
}

/// Report plus the refit model of every configuration that succeeded,
/// aligned with `report.rows`.
#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    pub report: EvalReport,
    pub models: Vec<Option<TrainedModel>>,
}

pub fn feature_set_display_name(name: &str) -> &str {
    match name {
        "bow" => "Bag-of-Words",
        "cui" => "Bag-of-CUIs",
        other => other,
    }
}

fn run_config(
    train: &Dataset,
    test: &Dataset,
    entry: &RosterEntry,
    feature_set: &str,
    settings: &EvalSettings,
) -> Result<(ConfigRecord, TrainedModel)> {
    let outcome = grid_search(train, &entry.grid, settings.folds, settings.seed, feature_set)?;
    let scores =
        test.vectors().iter().map(|v| predict_score(&outcome.model, v)).collect::<Result<Vec<_>>>()?;
    let best = outcome.best();
    let record = ConfigRecord {
        classifier: entry.kind,
        feature_set: feature_set.to_string(),
        status: ConfigStatus::Ok,
        best_params: Some(best.params.clone()),
        cv_auc_mean: best.cv_auc_mean,
        cv_auc_sd: best.cv_auc_sd,
        test_auc: Some(roc_auc(&scores, test.labels())?),
        error: None,
        roc: roc_curve(&scores, test.labels())?,
        grid: outcome.points.clone(),
    };
    Ok((record, outcome.model))
}

/// Runs every roster entry on every feature set against one shared
/// stratified split, so test AUCs are paired across configurations.
/// Rows come out classifier-major in roster order. A configuration that
/// fails is kept as a `failed` row; see [`EvalReport::all_failed`].
pub fn evaluate_matrix(
    feature_sets: &[(String, Dataset)],
    roster: &[RosterEntry],
    settings: &EvalSettings,
) -> Result<MatrixOutcome> {
    let Some((_, first)) = feature_sets.first() else {
        return Err(Error::Contract("no feature sets to evaluate".into()));
    };
    if roster.is_empty() {
        return Err(Error::Contract("empty classifier roster".into()));
    }
    for (name, data) in feature_sets {
        if data.labels() != first.labels() || data.ids() != first.ids() {
            return Err(Error::Contract(format!(
                "feature set {name:?} does not share labels and row order with {:?}",
                feature_sets[0].0
            )));
        }
    }
    let split = stratified_split(first.labels(), settings.split_ratio, settings.seed)?;
    let parts: Vec<(Dataset, Dataset)> = feature_sets
        .iter()
        .map(|(_, d)| (d.subset(&split.train_indices), d.subset(&split.test_indices)))
        .collect();

    let configs: Vec<(usize, usize)> =
        (0..roster.len()).flat_map(|r| (0..feature_sets.len()).map(move |f| (r, f))).collect();
    let results = par::map(&configs, |&(r, f)| {
        let (train, test) = &parts[f];
        run_config(train, test, &roster[r], &feature_sets[f].0, settings)
    });

    let mut rows = Vec::with_capacity(configs.len());
    let mut models = Vec::with_capacity(configs.len());
    for (&(r, f), result) in configs.iter().zip(results) {
        match result {
            Ok((record, model)) => {
                rows.push(record);
                models.push(Some(model));
            }
            Err(e) => {
                rows.push(ConfigRecord {
                    classifier: roster[r].kind,
                    feature_set: feature_sets[f].0.clone(),
                    status: ConfigStatus::Failed,
                    best_params: None,
                    cv_auc_mean: None,
                    cv_auc_sd: None,
                    test_auc: None,
                    error: Some(e.to_string()),
                    grid: Vec::new(),
                    roc: Vec::new(),
                });
                models.push(None);
            }
        }
    }

    let (train, test) = &parts[0];
    let report = EvalReport {
        seed: settings.seed,
        split_ratio: settings.split_ratio,
        folds: settings.folds,
        n_train: train.len(),
        n_test: test.len(),
        train_positives: train.positives(),
        test_positives: test.positives(),
        feature_sets: feature_sets.iter().map(|(n, _)| n.clone()).collect(),
        classifiers: roster.iter().map(|e| e.kind).collect(),
        rows,
    };
    Ok(MatrixOutcome { report, models })
}

impl EvalReport {
    pub fn all_failed(&self) -> bool {
        self.rows.iter().all(|r| r.status == ConfigStatus::Failed)
    }

    pub fn row(&self, classifier: ClassifierKind, feature_set: &str) -> Option<&ConfigRecord> {
        self.rows.iter().find(|r| r.classifier == classifier && r.feature_set == feature_set)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<EvalReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Classifiers as rows, feature sets as columns, held-out AUC to three
    /// decimals. Failed cells read `failed`.
    pub fn to_table(&self) -> String {
        let names: Vec<&str> = self.classifiers.iter().map(|k| k.display_name()).collect();
        let first_width = names.iter().map(|n| n.len()).chain([10]).max().unwrap_or(10);
        let headers: Vec<&str> = self.feature_sets.iter().map(|f| feature_set_display_name(f)).collect();
        let widths: Vec<usize> = headers.iter().map(|h| h.len().max(6)).collect();

        let mut out = String::new();
        let _ = writeln!(
            out,
            "Held-out AUC (train {} / test {}, test positives {}, seed {})",
            self.n_train, self.n_test, self.test_positives, self.seed
        );
        let _ = write!(out, "{:<first_width$}", "Classifier");
        for (h, w) in headers.iter().zip(&widths) {
            let _ = write!(out, "  {h:>w$}");
        }
        out.push('\n');
        let total = first_width + widths.iter().map(|w| w + 2).sum::<usize>();
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for (kind, name) in self.classifiers.iter().zip(&names) {
            let _ = write!(out, "{name:<first_width$}");
            for (f, w) in self.feature_sets.iter().zip(&widths) {
                let cell = match self.row(*kind, f) {
                    Some(r) => match r.test_auc {
                        Some(auc) => format!("{auc:.3}"),
                        None => "failed".to_string(),
                    },
                    None => "-".to_string(),
                };
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
        }
        out
    }
}

impl ConfigRecord {
    /// `<classifier>_<feature_set>`, used for model and ROC file names.
    pub fn slug(&self) -> String {
        format!("{}_{}", self.classifier.slug(), self.feature_set)
    }

    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in &self.roc {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::GridSettings;
    use crate::sparse::SparseVector;

    fn data(n: usize, flip: bool) -> Dataset {
        let vectors = (0..n)
            .map(|i| {
                let x = ((i * 7919) % 97) as f64 / 97.0 + if i % 4 == 0 { 0.5 } else { 0.0 };
                SparseVector::from_pairs(vec![(0, if flip { -x } else { x }), (1, 1.0)], 2).unwrap()
            })
            .collect();
        let labels = (0..n).map(|i| i % 4 == 0).collect();
        Dataset::with_ids(vectors, labels, (0..n as i64).collect(), 2).unwrap()
    }

    fn small_settings() -> GridSettings {
        GridSettings { rf_trees: 5, gbdt_stages: 5, lr_epochs: 50, ..GridSettings::default() }
    }

    #[test]
    fn full_matrix_shape_and_range() {
        let sets = vec![("bow".to_string(), data(80, false)), ("cui".to_string(), data(80, true))];
        let roster = small_settings().roster(&ClassifierKind::ALL);
        let out = evaluate_matrix(&sets, &roster, &EvalSettings::default()).unwrap();
        assert_eq!(out.report.rows.len(), 10);
        assert_eq!(out.models.len(), 10);
        for r in &out.report.rows {
            if let Some(auc) = r.test_auc {
                assert!((0.0..=1.0).contains(&auc));
            }
        }
        let table = out.report.to_table();
        assert!(table.contains("Bag-of-CUIs"));
        assert!(table.contains("Gradient Boosting Decision Trees"));
    }

    #[test]
    fn minimal_matrix_and_determinism() {
        let sets = vec![("bow".to_string(), data(60, false))];
        let roster = small_settings().roster(&[ClassifierKind::LogisticRegression]);
        let a = evaluate_matrix(&sets, &roster, &EvalSettings::default()).unwrap();
        let b = evaluate_matrix(&sets, &roster, &EvalSettings::default()).unwrap();
        assert_eq!(a.report.rows.len(), 1);
        assert_eq!(a.report.to_json().unwrap(), b.report.to_json().unwrap());
        let back = EvalReport::from_json(&a.report.to_json().unwrap()).unwrap();
        assert_eq!(back, a.report);
    }

    #[test]
    fn failed_configuration_is_annotated() {
        let sets = vec![("bow".to_string(), data(60, false))];
        let roster = vec![RosterEntry {
            kind: ClassifierKind::NaiveBayes,
            grid: vec![Hyperparams::NaiveBayes { alpha: 0.0 }],
        }];
        let out = evaluate_matrix(&sets, &roster, &EvalSettings::default()).unwrap();
        assert!(out.report.all_failed());
        assert!(out.report.to_table().contains("failed"));
    }

    #[test]
    fn mismatched_feature_sets_rejected() {
        let sets = vec![("bow".to_string(), data(60, false)), ("cui".to_string(), data(64, false))];
        let roster = small_settings().roster(&[ClassifierKind::NaiveBayes]);
        assert!(matches!(evaluate_matrix(&sets, &roster, &EvalSettings::default()), Err(Error::Contract(_))));
    }
}
