use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::files;
use super::synth::{self, SynthSpec};
use super::PipelineConfig;
use crate::classifiers::{feature_importance, ClassifierKind, FeatureImportance, Hyperparams, TrainedModel};
use crate::cohort::{
    build_cohort, parse_admissions, parse_notes, read_cohort, write_cohort, write_histogram_csv, CohortStats,
};
use crate::concepts::{annotate_cohort, import_annotations, load_lexicon, vectorize_cuis};
use crate::evaluation::{evaluate_matrix, grid_search, EvalReport};
use crate::sparse::Dataset;
use crate::text::{build_vocabulary, stem_terms, tokenize, vectorize_tfidf, Stopwords};
use crate::{par, Error, Result};

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| Error::Contract(format!("no {key} file configured (set {key} = <path>)")))
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the synthetic tables, lexicon, planted terms and a config file
/// pointing at them. Returns the paths written.
pub fn cmd_synth(spec: &SynthSpec, output_dir: &Path) -> Result<Vec<PathBuf>> {
    let corpus = synth::generate(spec)?;
    let mut planted = corpus.planted_terms.join("\n");
    planted.push('\n');
    let cfg = format!(
        "# generated by synth (seed {})\nadmissions = {}\nnotes = {}\nlexicon = {}\noutput_dir = .\nseed = {}\n",
        spec.seed,
        files::ADMISSIONS,
        files::NOTES,
        files::LEXICON,
        spec.seed
    );
    let outputs = [
        (files::ADMISSIONS, corpus.admissions_csv),
        (files::NOTES, corpus.notes_csv),
        (files::LEXICON, corpus.lexicon_tsv),
        (files::PLANTED_TERMS, planted),
        (files::SYNTH_CONFIG, cfg),
    ];
    let mut written = Vec::new();
    for (name, body) in outputs {
        let path = output_dir.join(name);
        write_file(&path, body.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Parses the configured tables, builds the labelled cohort and writes
/// `cohort.jsonl`, `cohort_stats.json` and `interval_histogram.csv`.
pub fn cmd_cohort(config: &PipelineConfig) -> Result<CohortStats> {
    config.validate()?;
    let adm_path = required(&config.admissions, "admissions")?;
    let note_path = required(&config.notes, "notes")?;
    let admissions = parse_admissions(open(adm_path)?, &adm_path.display().to_string())?;
    let notes = parse_notes(open(note_path)?, &note_path.display().to_string(), &config.note_category)?;
    let (subjects, stats) = build_cohort(&admissions, &notes, config.window_days)?;

    let dir = &config.output_dir;
    let mut cohort = Vec::new();
    write_cohort(&mut cohort, &subjects)?;
    write_file(&dir.join(files::COHORT), &cohort)?;
    write_file(&dir.join(files::COHORT_STATS), json_line(&stats)?.as_bytes())?;
    let mut hist = Vec::new();
    write_histogram_csv(&mut hist, &stats).map_err(|e| Error::io(files::HISTOGRAM, e))?;
    write_file(&dir.join(files::HISTOGRAM), &hist)?;
    Ok(stats)
}

fn write_dataset(dir: &Path, feature_set: &str, vocab_json: String, data: &Dataset) -> Result<()> {
    write_file(&dir.join(files::vocabulary(feature_set)), vocab_json.as_bytes())?;
    let path = dir.join(files::dataset(feature_set));
    let mut out = Vec::new();
    data.write_to(&mut out).map_err(|e| Error::io(&path, e))?;
    write_file(&path, &out)
}

/// Builds the Bag-of-Words feature set, and Bag-of-CUIs when a lexicon or
/// an annotation file is configured. Returns the feature sets written.
pub fn cmd_featurize(config: &PipelineConfig, cohort: Option<&Path>) -> Result<Vec<String>> {
    config.validate()?;
    let dir = &config.output_dir;
    let cohort_path = cohort.map_or_else(|| dir.join(files::COHORT), Path::to_path_buf);
    let subjects = read_cohort(open(&cohort_path)?, &cohort_path.display().to_string())?;
    if subjects.is_empty() {
        return Err(Error::Data(format!("{}: cohort is empty", cohort_path.display())));
    }
    let stopwords = match &config.stopwords {
        Some(p) => Stopwords::load(p)?,
        None => Stopwords::pubmed(),
    };
    let labels: Vec<bool> = subjects.iter().map(|s| s.label).collect();
    let ids: Vec<i64> = subjects.iter().map(|s| s.hadm_id).collect();

    let tokens = par::map(&subjects, |s| tokenize(&s.summary_text));
    let vocab = build_vocabulary(&tokens, &stopwords, config.vocabulary)?;
    let vectors = par::map(&tokens, |t| vectorize_tfidf(&stem_terms(t, &stopwords), &vocab));
    let bow = Dataset::with_ids(vectors, labels, ids, vocab.len())?;
    write_dataset(dir, "bow", vocab.to_json()?, &bow)?;
    let mut produced = vec!["bow".to_string()];

    let want_cui = config.feature_sets.iter().any(|f| f == "cui");
    if want_cui && (config.annotations.is_some() || config.lexicon.is_some()) {
        let annotations = match (&config.annotations, &config.lexicon) {
            (Some(p), _) => import_annotations(open(p)?, &p.display().to_string())?,
            (None, Some(p)) => annotate_cohort(&subjects, &load_lexicon(open(p)?, &p.display().to_string())?),
            (None, None) => unreachable!(),
        };
        let (cui_vocab, cui_data) = vectorize_cuis(&annotations, &subjects, config.vocabulary)?;
        write_dataset(dir, "cui", cui_vocab.to_json()?, &cui_data)?;
        produced.push("cui".to_string());
    }
    Ok(produced)
}

/// The selected feature sets whose dataset files exist. Bag-of-Words is
/// required; the others are optional.
fn load_feature_sets(config: &PipelineConfig) -> Result<Vec<(String, Dataset)>> {
    let mut out = Vec::new();
    for fs in &config.feature_sets {
        let path = config.output_dir.join(files::dataset(fs));
        if fs != "bow" && !path.exists() {
            continue;
        }
        let data = Dataset::read_from(open(&path)?, &path.display().to_string())?;
        out.push((fs.clone(), data));
    }
    Ok(out)
}

fn model_path(dir: &Path, kind: ClassifierKind, feature_set: &str) -> PathBuf {
    dir.join(files::MODELS_DIR).join(format!("{}_{feature_set}.json", kind.slug()))
}

/// Runs the full configuration matrix on one shared split and writes the
/// best model per configuration, `report.json`, `report.txt` and one ROC
/// CSV per configuration. Fails with an evaluation error when every
/// configuration failed; the report is written first.
pub fn cmd_evaluate(config: &PipelineConfig) -> Result<EvalReport> {
    config.validate()?;
    let sets = load_feature_sets(config)?;
    let roster = config.grid.roster(&config.classifiers);
    let outcome =
        par::with_threads(config.threads, || evaluate_matrix(&sets, &roster, &config.eval_settings()))?;
    let dir = &config.output_dir;
    for (row, model) in outcome.report.rows.iter().zip(&outcome.models) {
        if let Some(model) = model {
            write_file(&model_path(dir, row.classifier, &row.feature_set), model.to_json()?.as_bytes())?;
            write_file(
                &dir.join(files::ROC_DIR).join(format!("{}.csv", row.slug())),
                row.roc_csv().as_bytes(),
            )?;
        }
    }
    let report = outcome.report;
    write_file(&dir.join(files::REPORT_JSON), report.to_json()?.as_bytes())?;
    write_file(&dir.join(files::REPORT_TEXT), report.to_table().as_bytes())?;
    if report.all_failed() {
        let first = report.rows.first().and_then(|r| r.error.clone()).unwrap_or_default();
        return Err(Error::Evaluation(format!("every configuration failed; first failure: {first}")));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub classifier: ClassifierKind,
    pub feature_set: String,
    pub best_params: Option<Hyperparams>,
    pub cv_auc_mean: Option<f64>,
    pub cv_auc_sd: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub seed: u64,
    pub folds: usize,
    pub n_rows: usize,
    pub records: Vec<TrainRecord>,
}

/// Tunes every configuration by cross-validation on all rows (no held-out
/// part) and writes the refit models plus `train_summary.json`.
pub fn cmd_train(config: &PipelineConfig) -> Result<TrainSummary> {
    config.validate()?;
    let sets = load_feature_sets(config)?;
    let roster = config.grid.roster(&config.classifiers);
    let configs: Vec<(usize, usize)> =
        (0..roster.len()).flat_map(|r| (0..sets.len()).map(move |f| (r, f))).collect();
    let results = par::with_threads(config.threads, || {
        par::map(&configs, |&(r, f)| {
            grid_search(&sets[f].1, &roster[r].grid, config.folds, config.seed, &sets[f].0)
        })
    });
    let dir = &config.output_dir;
    let mut records = Vec::new();
    for (&(r, f), result) in configs.iter().zip(results) {
        let (kind, fs) = (roster[r].kind, sets[f].0.clone());
        let record = match result {
            Ok(out) => {
                write_file(&model_path(dir, kind, &fs), out.model.to_json()?.as_bytes())?;
                let best = out.best();
                TrainRecord {
                    classifier: kind,
                    feature_set: fs,
                    best_params: Some(best.params.clone()),
                    cv_auc_mean: best.cv_auc_mean,
                    cv_auc_sd: best.cv_auc_sd,
                    error: None,
                }
            }
            Err(e) => TrainRecord {
                classifier: kind,
                feature_set: fs,
                best_params: None,
                cv_auc_mean: None,
                cv_auc_sd: None,
                error: Some(e.to_string()),
            },
        };
        records.push(record);
    }
    let summary = TrainSummary {
        seed: config.seed,
        folds: config.folds,
        n_rows: sets.first().map_or(0, |(_, d)| d.len()),
        records,
    };
    write_file(&dir.join(files::TRAIN_SUMMARY), json_line(&summary)?.as_bytes())?;
    if summary.records.iter().all(|r| r.error.is_some()) {
        return Err(Error::Evaluation("every configuration failed to train".into()));
    }
    Ok(summary)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Ranked-grid tag cloud: terms in importance order, four per row, font
/// size linear in normalized importance between `font_min` and `font_max`.
pub fn render_tag_cloud(items: &[FeatureImportance], font_min: f64, font_max: f64) -> String {
    const COLUMNS: usize = 4;
    const CELL_W: f64 = 240.0;
    let cell_h = font_max * 1.6;
    let rows = items.len().div_ceil(COLUMNS).max(1);
    let (width, height) = (CELL_W * COLUMNS as f64, cell_h * rows as f64);
    let hi = items.iter().map(|i| i.importance).fold(f64::NEG_INFINITY, f64::max);
    let lo = items.iter().map(|i| i.importance).fold(f64::INFINITY, f64::min);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    for (rank, item) in items.iter().enumerate() {
        let norm = if hi > lo { (item.importance - lo) / (hi - lo) } else { 1.0 };
        let size = font_min + (font_max - font_min) * norm;
        let x = CELL_W * (rank % COLUMNS) as f64 + CELL_W / 2.0;
        let y = cell_h * (rank / COLUMNS) as f64 + cell_h * 0.7;
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"{size:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>",
            xml_escape(&item.term)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Top-`k` feature importance of a saved model as CSV and SVG, written
/// next to the other outputs as `importance_<model>.csv` and
/// `tagcloud_<model>.svg`. Without an explicit vocabulary the one matching
/// the model's feature set is used.
pub fn cmd_report(
    config: &PipelineConfig,
    model: &Path,
    vocabulary: Option<&Path>,
    k: usize,
) -> Result<Vec<FeatureImportance>> {
    config.validate()?;
    let trained = TrainedModel::from_json(&read_text(model)?)?;
    let vocab_path = vocabulary.map_or_else(
        || config.output_dir.join(files::vocabulary(&trained.metadata.feature_set)),
        Path::to_path_buf,
    );
    let vocab = crate::text::Vocabulary::from_json(&read_text(&vocab_path)?)?;
    if vocab.len() != trained.dimension() {
        return Err(Error::Contract(format!(
            "{} has {} terms but the model expects {}",
            vocab_path.display(),
            vocab.len(),
            trained.dimension()
        )));
    }
    let items = feature_importance(&trained, &vocab, k)?;

    let stem = model.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let dir = &config.output_dir;
    let csv_path = dir.join(format!("importance_{stem}.csv"));
    let mut csv = BufWriter::new(Vec::new());
    let io = |e| Error::io(&csv_path, e);
    writeln!(csv, "rank,term,importance,weight").map_err(io)?;
    for (i, item) in items.iter().enumerate() {
        let weight = item.weight.map(|w| w.to_string()).unwrap_or_default();
        writeln!(csv, "{},{},{},{}", i + 1, item.term, item.importance, weight).map_err(io)?;
    }
    let bytes = csv.into_inner().map_err(|e| Error::io(&csv_path, e.into_error()))?;
    write_file(&csv_path, &bytes)?;
    let svg = render_tag_cloud(&items, config.font_min, config.font_max);
    write_file(&dir.join(format!("tagcloud_{stem}.svg")), svg.as_bytes())?;
    Ok(items)
}
