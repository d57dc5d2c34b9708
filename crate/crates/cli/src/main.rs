//! `readmit`: command-line driver for the readmission pipeline.
//!
//! Exit codes: 0 success, 2 input or data error, 3 evaluation failure,
//! 4 unsupported operation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use readmit_core::cohort::CohortStats;
use readmit_core::pipeline::{self, PipelineConfig, SynthSpec};
use readmit_core::{par, Error, Result};

#[derive(Parser)]
#[command(name = "readmit", version, about = "30-day ICU readmission prediction from discharge summaries")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set lr_lambdas=0.01,0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic admission and note tables.
    Synth(SynthArgs),
    /// Build the labelled cohort from admission and note tables.
    Cohort {
        #[arg(long)]
        admissions: Option<PathBuf>,
        #[arg(long)]
        notes: Option<PathBuf>,
        #[arg(long)]
        window_days: Option<u32>,
    },
    /// Build Bag-of-Words and, with a lexicon or annotations, Bag-of-CUIs datasets.
    Featurize {
        /// Cohort file (default: <output-dir>/cohort.jsonl).
        #[arg(long)]
        cohort: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Tune and fit every configuration on all rows.
    Train(RosterArgs),
    /// Tune on a stratified training split and score on the held-out part.
    Evaluate(RosterArgs),
    /// Top-k feature importance of a saved model as CSV and SVG.
    Report {
        #[arg(long)]
        model: PathBuf,
        /// Vocabulary file (default: the one matching the model's feature set).
        #[arg(long)]
        vocabulary: Option<PathBuf>,
        #[arg(short, long)]
        k: Option<usize>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = SynthSpec::default().n_subjects)]
    n_subjects: usize,
    #[arg(long, default_value_t = SynthSpec::default().positive_rate)]
    positive_rate: f64,
    #[arg(long, default_value_t = SynthSpec::default().n_signal_terms)]
    n_signal_terms: usize,
    #[arg(long, default_value_t = SynthSpec::default().signal_strength)]
    signal_strength: f64,
    #[arg(long, default_value_t = SynthSpec::default().vocabulary_size)]
    vocabulary_size: usize,
}

#[derive(Args)]
struct RosterArgs {
    /// Comma-separated classifier names (nb, svm, lr, rf, gbdt).
    #[arg(long)]
    classifiers: Option<String>,
    /// Comma-separated feature sets (bow, cui).
    #[arg(long)]
    feature_sets: Option<String>,
}

fn set(config: &mut PipelineConfig, key: &str, value: &str) -> Result<()> {
    config.set(key, value).map_err(|m| Error::Contract(format!("command line: {m}")))
}

fn set_path(config: &mut PipelineConfig, key: &str, value: &Option<PathBuf>) -> Result<()> {
    match value {
        Some(p) => set(config, key, &p.to_string_lossy()),
        None => Ok(()),
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = Some(threads);
    }
    set_path(&mut config, "output_dir", &cli.output_dir)?;
    for item in &cli.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Contract(format!("--set expects KEY=VALUE, got {item:?}")))?;
        set(&mut config, k, v)?;
    }
    match &cli.command {
        Command::Cohort { admissions, notes, window_days } => {
            set_path(&mut config, "admissions", admissions)?;
            set_path(&mut config, "notes", notes)?;
            if let Some(w) = window_days {
                config.window_days = *w;
            }
        }
        Command::Featurize { lexicon, annotations, stopwords, .. } => {
            set_path(&mut config, "lexicon", lexicon)?;
            set_path(&mut config, "annotations", annotations)?;
            set_path(&mut config, "stopwords", stopwords)?;
        }
        Command::Train(r) | Command::Evaluate(r) => {
            if let Some(c) = &r.classifiers {
                set(&mut config, "classifiers", c)?;
            }
            if let Some(f) = &r.feature_sets {
                set(&mut config, "feature_sets", f)?;
            }
        }
        Command::Synth(_) | Command::Report { .. } => {}
    }
    Ok(config)
}

fn print_stats(stats: &CohortStats) {
    println!("input admissions     {}", stats.input_admissions);
    println!("excluded newborn     {}", stats.newborn);
    println!("excluded expired     {}", stats.expired);
    println!("excluded no summary  {}", stats.no_summary);
    println!("excluded multiple    {}", stats.multiple_summaries);
    println!("retained             {}", stats.retained_count);
    println!("readmitted           {}", stats.positive_count);
}

fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    par::with_threads(config.threads, || match &cli.command {
        Command::Synth(a) => {
            let spec = SynthSpec {
                n_subjects: a.n_subjects,
                positive_rate: a.positive_rate,
                n_signal_terms: a.n_signal_terms,
                signal_strength: a.signal_strength,
                vocabulary_size: a.vocabulary_size,
                seed: config.seed,
            };
            for path in pipeline::cmd_synth(&spec, &config.output_dir)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Cohort { .. } => {
            print_stats(&pipeline::cmd_cohort(&config)?);
            Ok(())
        }
        Command::Featurize { cohort, .. } => {
            let sets = pipeline::cmd_featurize(&config, cohort.as_deref())?;
            println!("feature sets: {}", sets.join(", "));
            Ok(())
        }
        Command::Train(_) => {
            let summary = pipeline::cmd_train(&config)?;
            for r in &summary.records {
                match (r.cv_auc_mean, &r.error) {
                    (Some(m), _) => {
                        println!("{:<20} {:<4} cv AUC {m:.3}", r.classifier.slug(), r.feature_set)
                    }
                    (None, e) => println!(
                        "{:<20} {:<4} failed: {}",
                        r.classifier.slug(),
                        r.feature_set,
                        e.as_deref().unwrap_or("")
                    ),
                }
            }
            Ok(())
        }
        Command::Evaluate(_) => {
            let report = pipeline::cmd_evaluate(&config)?;
            print!("{}", report.to_table());
            Ok(())
        }
        Command::Report { model, vocabulary, k } => {
            let k = k.unwrap_or(config.importance_k);
            for (i, item) in
                pipeline::cmd_report(&config, model, vocabulary.as_deref(), k)?.iter().enumerate()
            {
                println!("{:>3}  {:<24} {:.6}", i + 1, item.term, item.importance);
            }
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
