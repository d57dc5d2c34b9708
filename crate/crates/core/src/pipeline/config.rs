use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifiers::ClassifierKind;
use crate::cohort::{DEFAULT_WINDOW_DAYS, DISCHARGE_SUMMARY};
use crate::evaluation::{EvalSettings, GridSettings};
use crate::text::VocabularySettings;
use crate::{Error, Result};

/// Everything the commands need. Built from defaults, then a flat
/// `key = value` file, then command-line overrides, all through [`set`].
///
/// [`set`]: PipelineConfig::set
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub admissions: Option<PathBuf>,
    pub notes: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub note_category: String,
    pub window_days: u32,
    pub vocabulary: VocabularySettings,
    pub seed: u64,
    pub split_ratio: f64,
    pub folds: usize,
    pub classifiers: Vec<ClassifierKind>,
    pub feature_sets: Vec<String>,
    pub grid: GridSettings,
    pub threads: Option<usize>,
    pub importance_k: usize,
    pub font_min: f64,
    pub font_max: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            admissions: None,
            notes: None,
            lexicon: None,
            annotations: None,
            stopwords: None,
            output_dir: PathBuf::from("out"),
            note_category: DISCHARGE_SUMMARY.to_string(),
            window_days: DEFAULT_WINDOW_DAYS,
            vocabulary: VocabularySettings::default(),
            seed: 42,
            split_ratio: 0.7,
            folds: 5,
            classifiers: ClassifierKind::ALL.to_vec(),
            feature_sets: vec!["bow".into(), "cui".into()],
            grid: GridSettings::default(),
            threads: None,
            importance_k: 20,
            font_min: 10.0,
            font_max: 40.0,
        }
    }
}

/// Keys accepted by [`PipelineConfig::set`], in documentation order.
pub const CONFIG_KEYS: &[&str] = &[
    "admissions",
    "notes",
    "lexicon",
    "annotations",
    "stopwords",
    "output_dir",
    "note_category",
    "window_days",
    "min_doc_count",
    "max_doc_fraction",
    "seed",
    "split_ratio",
    "folds",
    "classifiers",
    "feature_sets",
    "threads",
    "importance_k",
    "font_min",
    "font_max",
    "nb_alphas",
    "svm_lambdas",
    "svm_epochs",
    "lr_lambdas",
    "lr_epochs",
    "lr_learning_rate",
    "lr_tolerance",
    "rf_trees",
    "rf_depths",
    "rf_mtry",
    "rf_min_leaf",
    "gbdt_stages",
    "gbdt_shrinkages",
    "gbdt_depth",
    "gbdt_min_leaf",
];

fn scalar<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: Display,
{
    value.parse().map_err(|e| format!("invalid value {value:?} for {key}: {e}"))
}

fn list<T: FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: Display,
{
    value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(|v| scalar(key, v)).collect()
}

fn optional<T: FromStr>(key: &str, value: &str) -> std::result::Result<Option<T>, String>
where
    T::Err: Display,
{
    match value {
        "" | "auto" | "none" => Ok(None),
        v => scalar(key, v).map(Some),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Applies one setting. Unknown keys and malformed values are rejected
    /// with a message naming the key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let g = &mut self.grid;
        match key.trim() {
            "admissions" => self.admissions = path(v),
            "notes" => self.notes = path(v),
            "lexicon" => self.lexicon = path(v),
            "annotations" => self.annotations = path(v),
            "stopwords" => self.stopwords = path(v),
            "output_dir" => self.output_dir = PathBuf::from(v),
            "note_category" => self.note_category = v.to_string(),
            "window_days" => self.window_days = scalar(key, v)?,
            "min_doc_count" => self.vocabulary.min_doc_count = scalar(key, v)?,
            "max_doc_fraction" => self.vocabulary.max_doc_fraction = scalar(key, v)?,
            "seed" => self.seed = scalar(key, v)?,
            "split_ratio" => self.split_ratio = scalar(key, v)?,
            "folds" => self.folds = scalar(key, v)?,
            "classifiers" => self.classifiers = list(key, v)?,
            "feature_sets" => self.feature_sets = list(key, v)?,
            "threads" => self.threads = optional(key, v)?,
            "importance_k" => self.importance_k = scalar(key, v)?,
            "font_min" => self.font_min = scalar(key, v)?,
            "font_max" => self.font_max = scalar(key, v)?,
            "nb_alphas" => g.nb_alphas = list(key, v)?,
            "svm_lambdas" => g.svm_lambdas = list(key, v)?,
            "svm_epochs" => g.svm_epochs = scalar(key, v)?,
            "lr_lambdas" => g.lr_lambdas = list(key, v)?,
            "lr_epochs" => g.lr_epochs = scalar(key, v)?,
            "lr_learning_rate" => g.lr_learning_rate = scalar(key, v)?,
            "lr_tolerance" => g.lr_tolerance = scalar(key, v)?,
            "rf_trees" => g.rf_trees = scalar(key, v)?,
            "rf_depths" => g.rf_depths = list(key, v)?,
            "rf_mtry" => g.rf_mtry = optional(key, v)?,
            "rf_min_leaf" => g.rf_min_leaf = scalar(key, v)?,
            "gbdt_stages" => g.gbdt_stages = scalar(key, v)?,
            "gbdt_shrinkages" => g.gbdt_shrinkages = list(key, v)?,
            "gbdt_depth" => g.gbdt_depth = scalar(key, v)?,
            "gbdt_min_leaf" => g.gbdt_min_leaf = scalar(key, v)?,
            other => return Err(format!("unknown configuration key {other:?}")),
        }
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment line. Relative
    /// paths are resolved against `base_dir` when given.
    pub fn apply_text(&mut self, text: &str, source_name: &str, base_dir: Option<&Path>) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err =
                |message: String| Error::Line { source_name: source_name.to_string(), line: i + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            self.set(key, value).map_err(err)?;
        }
        if let Some(base) = base_dir {
            self.resolve_paths(base);
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = PipelineConfig::default();
        config.apply_text(&text, &path.display().to_string(), path.parent())?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p.as_mut().filter(|p| p.is_relative()) {
                *inner = base.join(&*inner);
            }
        };
        fix(&mut self.admissions);
        fix(&mut self.notes);
        fix(&mut self.lexicon);
        fix(&mut self.annotations);
        fix(&mut self.stopwords);
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        self.vocabulary.validate()?;
        if self.window_days == 0 {
            return bad("window_days must be positive".into());
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split_ratio must be in (0, 1), got {}", self.split_ratio));
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.classifiers.is_empty() {
            return bad("no classifiers selected".into());
        }
        if let Some(f) = self.feature_sets.iter().find(|f| *f != "bow" && *f != "cui") {
            return bad(format!("unknown feature set {f:?}; expected bow or cui"));
        }
        if !self.feature_sets.iter().any(|f| f == "bow") {
            return bad("the bow feature set is always required".into());
        }
        if self.importance_k == 0 {
            return bad("importance_k must be at least 1".into());
        }
        if !(self.font_min > 0.0 && self.font_min <= self.font_max) {
            return bad(format!(
                "need 0 < font_min <= font_max, got {} and {}",
                self.font_min, self.font_max
            ));
        }
        for kind in &self.classifiers {
            if self.grid.grid(*kind).is_empty() {
                return bad(format!("empty grid for {kind}"));
            }
        }
        Ok(())
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings { split_ratio: self.split_ratio, folds: self.folds, seed: self.seed }
    }
}
