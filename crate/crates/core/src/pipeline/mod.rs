//! Command layer used by the CLI: configuration, the synthetic corpus
//! generator, and one function per subcommand. Every command reads and
//! writes files under the configured output directory.

mod commands;
mod config;
pub mod synth;

pub use commands::{
    cmd_cohort, cmd_evaluate, cmd_featurize, cmd_report, cmd_synth, cmd_train, render_tag_cloud, TrainRecord,
    TrainSummary,
};
pub use config::{PipelineConfig, CONFIG_KEYS};
pub use synth::{SynthCorpus, SynthSpec};

/// File names written under the output directory.
pub mod files {
    pub const ADMISSIONS: &str = "admissions.csv";
    pub const NOTES: &str = "noteevents.csv";
    pub const LEXICON: &str = "lexicon.tsv";
    pub const PLANTED_TERMS: &str = "planted_terms.txt";
    pub const SYNTH_CONFIG: &str = "synth.cfg";
    pub const COHORT: &str = "cohort.jsonl";
    pub const COHORT_STATS: &str = "cohort_stats.json";
    pub const HISTOGRAM: &str = "interval_histogram.csv";
    pub const REPORT_JSON: &str = "report.json";
    pub const REPORT_TEXT: &str = "report.txt";
    pub const TRAIN_SUMMARY: &str = "train_summary.json";
    pub const MODELS_DIR: &str = "models";
    pub const ROC_DIR: &str = "roc";

    pub fn vocabulary(feature_set: &str) -> String {
        format!("vocab_{feature_set}.json")
    }

    pub fn dataset(feature_set: &str) -> String {
        format!("dataset_{feature_set}.svm")
    }
}
