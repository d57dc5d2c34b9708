//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails. A name filter given on the command
//! line (`cargo test --test acceptance -- porter`) runs matching criteria.
//!
//! Set `READMIT_MIMIC_DIR` to a directory holding `ADMISSIONS.csv` and
//! `NOTEEVENTS.csv` to run the optional real-data check.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;
use readmit_core::classifiers::{logistic_gradient, logistic_objective, ClassifierKind};
use readmit_core::cohort::{build_cohort, parse_admissions, parse_notes, DISCHARGE_SUMMARY};
use readmit_core::evaluation::{roc_auc, roc_curve, trapezoid_area, EvalReport};
use readmit_core::pipeline::{self, files, PipelineConfig, SynthSpec};
use readmit_core::sparse::{Dataset, SparseVector};
use readmit_core::text::porter_stem;
use readmit_core::{par, rng};
use tempfile::TempDir;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

// ---------------------------------------------------------------- AUC

/// Exact pair count in half-units: 2 * wins + ties.
fn brute_force_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut doubled: u64 = 0;
    let (mut p, mut n) = (0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if li {
            p += 1;
        } else {
            n += 1;
        }
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            doubled += match scores[i].partial_cmp(&scores[j]).unwrap() {
                std::cmp::Ordering::Greater => 2,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => 0,
            };
        }
    }
    doubled as f64 / (2.0 * p as f64 * n as f64)
}

/// Random scored cases with both classes; every other case draws scores
/// from a ten-value grid so ties are common.
fn random_cases(count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<bool>)> {
    let mut r = rng::stream(seed);
    (0..count)
        .map(|c| {
            let n = r.gen_range(2..=100);
            let mut labels: Vec<bool> = (0..n).map(|_| r.gen_bool(0.4)).collect();
            labels[0] = true;
            labels[1] = false;
            let scores =
                (0..n)
                    .map(|_| {
                        if c % 2 == 0 {
                            f64::from(r.gen_range(0..10)) / 10.0
                        } else {
                            r.gen_range(-3.0..3.0)
                        }
                    })
                    .collect();
            (scores, labels)
        })
        .collect()
}

fn auc_oracle() -> Verdict {
    let start = Instant::now();
    let cases = random_cases(200, 1);
    let worst =
        cases.iter().map(|(s, l)| (roc_auc(s, l).unwrap() - brute_force_auc(s, l)).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-12 && elapsed < Duration::from_secs(5),
        format!("200 cases, max |diff| {worst:.1e}, {:.3}s", elapsed.as_secs_f64()),
    )
}

fn roc_consistency() -> Verdict {
    let cases = random_cases(100, 2);
    let worst = cases
        .iter()
        .map(|(s, l)| (trapezoid_area(&roc_curve(s, l).unwrap()) - roc_auc(s, l).unwrap()).abs())
        .fold(0.0, f64::max);
    verdict(worst <= 1e-12, format!("100 cases, max |area - auc| {worst:.1e}"))
}

// ---------------------------------------------------------------- gradient

fn gradient_check() -> Verdict {
    let mut r = rng::stream(3);
    let rows: Vec<SparseVector> = (0..30)
        .map(|_| {
            let mut pairs = Vec::new();
            for j in 0..10u32 {
                if r.gen_bool(0.35) {
                    pairs.push((j, r.gen_range(-1.0..1.0)));
                }
            }
            SparseVector::from_pairs(pairs, 10).unwrap()
        })
        .collect();
    let labels: Vec<bool> = (0..30).map(|_| r.gen_bool(0.5)).collect();
    let data = Dataset::new(rows, labels, 10).unwrap();
    let lambda = 0.05;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w: Vec<f64> = (0..10).map(|_| r.gen_range(-2.0..2.0)).collect();
        let b = r.gen_range(-1.0..1.0);
        let (g, gb) = logistic_gradient(&data, &w, b, lambda);
        let mut analytic = g.clone();
        analytic.push(gb);
        let mut numeric = Vec::with_capacity(11);
        for j in 0..10 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            numeric.push(
                (logistic_objective(&data, &wp, b, lambda) - logistic_objective(&data, &wm, b, lambda))
                    / (2.0 * h),
            );
        }
        numeric.push(
            (logistic_objective(&data, &w, b + h, lambda) - logistic_objective(&data, &w, b - h, lambda))
                / (2.0 * h),
        );
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale = analytic
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt());
        worst = worst.max(diff / scale.max(1e-12));
    }
    verdict(worst < 1e-4, format!("10 points on 30x10, max relative error {worst:.2e}"))
}

// ---------------------------------------------------------------- synthetic runs

struct Run {
    dir: TempDir,
    config: PipelineConfig,
    report: EvalReport,
    elapsed: Duration,
}

/// synth -> cohort -> featurize -> evaluate on Bag-of-Words.
fn run_pipeline(spec: &SynthSpec, classifiers: &[ClassifierKind]) -> Run {
    let start = Instant::now();
    let dir = TempDir::new().unwrap();
    pipeline::cmd_synth(spec, dir.path()).unwrap();
    let mut config = PipelineConfig::load(&dir.path().join(files::SYNTH_CONFIG)).unwrap();
    config.classifiers = classifiers.to_vec();
    config.feature_sets = vec!["bow".into()];
    pipeline::cmd_cohort(&config).unwrap();
    pipeline::cmd_featurize(&config, None).unwrap();
    let report = pipeline::cmd_evaluate(&config).unwrap();
    Run { dir, config, report, elapsed: start.elapsed() }
}

fn test_auc(report: &EvalReport, kind: ClassifierKind) -> f64 {
    report.row(kind, "bow").and_then(|r| r.test_auc).unwrap_or(f64::NAN)
}

fn planted_spec() -> SynthSpec {
    SynthSpec {
        n_subjects: 2000,
        positive_rate: 0.06,
        n_signal_terms: 10,
        signal_strength: 0.8,
        ..SynthSpec::default()
    }
}

fn planted_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        run_pipeline(
            &planted_spec(),
            &[ClassifierKind::NaiveBayes, ClassifierKind::LinearSvm, ClassifierKind::LogisticRegression],
        )
    })
}

fn planted_signal() -> Verdict {
    let run = planted_run();
    let nb = test_auc(&run.report, ClassifierKind::NaiveBayes);
    let svm = test_auc(&run.report, ClassifierKind::LinearSvm);
    let lr = test_auc(&run.report, ClassifierKind::LogisticRegression);
    let ok =
        lr >= 0.85 && svm >= 0.85 && nb >= 0.70 && nb < lr.max(svm) && run.elapsed < Duration::from_secs(300);
    verdict(
        ok,
        format!(
            "LR {lr:.3}, SVM {svm:.3}, NB {nb:.3} (test n={}, positives {}), {:.1}s",
            run.report.n_test,
            run.report.test_positives,
            run.elapsed.as_secs_f64()
        ),
    )
}

fn importance_recovery() -> Verdict {
    let run = planted_run();
    let planted: Vec<String> = fs::read_to_string(run.dir.path().join(files::PLANTED_TERMS))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    let model = run.dir.path().join(files::MODELS_DIR).join("logistic_regression_bow.json");
    let top = pipeline::cmd_report(&run.config, &model, None, 20).unwrap();
    let hits = top.iter().filter(|f| planted.contains(&f.term)).count();
    verdict(hits >= 8, format!("{hits} of {} planted terms in the logistic top 20", planted.len()))
}

fn null_line(report: &EvalReport) -> (bool, String) {
    let mut ok = true;
    let parts: Vec<String> = ClassifierKind::ALL
        .iter()
        .map(|&k| {
            let auc = test_auc(report, k);
            ok &= (0.45..=0.55).contains(&auc);
            format!("{} {auc:.3}", k.slug())
        })
        .collect();
    (ok, parts.join(", "))
}

/// Held-out AUC under the null has standard deviation near
/// sqrt((P + N + 1) / (12 P N)). With 6% positives and n = 2000 the test
/// split holds about 30 positives, so that deviation is about 0.054 and a
/// +-0.05 band would be missed by chance. The gated run uses a cohort large
/// and balanced enough for a deviation near 0.012; the small run is printed
/// for reference.
fn null_signal() -> Verdict {
    let powered =
        SynthSpec { n_subjects: 8000, positive_rate: 0.5, signal_strength: 0.0, ..SynthSpec::default() };
    let run = run_pipeline(&powered, &ClassifierKind::ALL);
    let (ok, detail) = null_line(&run.report);
    let small = run_pipeline(&SynthSpec { signal_strength: 0.0, ..planted_spec() }, &ClassifierKind::ALL);
    let (small_ok, small_detail) = null_line(&small.report);
    verdict(
        ok,
        format!(
            "n=8000 rate=0.5 (test positives {}): {detail}; reference n=2000 rate=0.06 (test positives {}, {}): {small_detail}",
            run.report.test_positives,
            small.report.test_positives,
            if small_ok { "inside band" } else { "outside band" }
        ),
    )
}

// ---------------------------------------------------------------- cohort

fn cohort_fixture() -> Verdict {
    let dir = data_dir().join("cohort_fixture");
    let adm =
        parse_admissions(fs::read(dir.join("admissions.csv")).unwrap().as_slice(), "admissions.csv").unwrap();
    let notes = parse_notes(
        fs::read(dir.join("noteevents.csv")).unwrap().as_slice(),
        "noteevents.csv",
        DISCHARGE_SUMMARY,
    )
    .unwrap();
    let (subjects, stats) = build_cohort(&adm, &notes, 30).unwrap();

    let expected: Vec<(i64, bool, Option<f64>)> = fs::read_to_string(dir.join("expected.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1] == "1", (!f[2].is_empty()).then(|| f[2].parse().unwrap()))
        })
        .collect();
    let got: Vec<(i64, bool, Option<f64>)> =
        subjects.iter().map(|s| (s.hadm_id, s.label, s.interval_days)).collect();
    let labels_ok = got.len() == expected.len()
        && got.iter().zip(&expected).all(|(g, e)| {
            g.0 == e.0
                && g.1 == e.1
                && match (g.2, e.2) {
                    (Some(a), Some(b)) => (a - b).abs() < 1e-9,
                    (None, None) => true,
                    _ => false,
                }
        });

    let expected_stats: BTreeMap<String, usize> = fs::read_to_string(dir.join("expected_stats.txt"))
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.parse().unwrap()))
        .collect();
    let got_stats: BTreeMap<String, usize> = [
        ("input_admissions", stats.input_admissions),
        ("newborn", stats.newborn),
        ("expired", stats.expired),
        ("no_summary", stats.no_summary),
        ("multiple_summaries", stats.multiple_summaries),
        ("retained_count", stats.retained_count),
        ("positive_count", stats.positive_count),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let hist_sum: usize = stats.interval_histogram.iter().map(|(_, c)| c).sum();
    verdict(
        labels_ok && got_stats == expected_stats && hist_sum == stats.positive_count,
        format!(
            "{} admissions, {} retained, {} readmitted, exclusions newborn/expired/no-summary/multiple = {}/{}/{}/{}",
            stats.input_admissions,
            stats.retained_count,
            stats.positive_count,
            stats.newborn,
            stats.expired,
            stats.no_summary,
            stats.multiple_summaries
        ),
    )
}

// ---------------------------------------------------------------- porter

fn porter_conformance() -> Verdict {
    let voc = fs::read_to_string(data_dir().join("porter_voc.txt")).unwrap();
    let out = fs::read_to_string(data_dir().join("porter_output.txt")).unwrap();
    let pairs: Vec<(&str, &str)> = voc.lines().zip(out.lines()).collect();
    let mismatches: Vec<&(&str, &str)> = pairs.iter().filter(|(w, s)| porter_stem(w) != *s).collect();
    let detail = match mismatches.first() {
        None => format!("{}/{} words", pairs.len(), pairs.len()),
        Some((w, s)) => format!(
            "{} mismatches of {}; first {w:?} -> {:?}, expected {s:?}",
            mismatches.len(),
            pairs.len(),
            porter_stem(w)
        ),
    };
    verdict(mismatches.is_empty() && pairs.len() == voc.lines().count(), detail)
}

// ---------------------------------------------------------------- determinism

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Full synth -> report pipeline with every classifier and both feature sets.
fn full_pipeline(threads: usize) -> (TempDir, BTreeMap<PathBuf, Vec<u8>>) {
    let dir = TempDir::new().unwrap();
    let spec =
        SynthSpec { n_subjects: 600, positive_rate: 0.15, vocabulary_size: 600, ..SynthSpec::default() };
    par::with_threads(Some(threads), || {
        pipeline::cmd_synth(&spec, dir.path()).unwrap();
        let mut config = PipelineConfig::load(&dir.path().join(files::SYNTH_CONFIG)).unwrap();
        config.threads = Some(threads);
        pipeline::cmd_cohort(&config).unwrap();
        pipeline::cmd_featurize(&config, None).unwrap();
        pipeline::cmd_evaluate(&config).unwrap();
        for model in ["logistic_regression_bow", "random_forest_cui", "gbdt_bow"] {
            let path = dir.path().join(files::MODELS_DIR).join(format!("{model}.json"));
            pipeline::cmd_report(&config, &path, None, 20).unwrap();
        }
    });
    let files = files_under(dir.path());
    (dir, files)
}

fn determinism() -> Verdict {
    let (_a, one) = full_pipeline(1);
    let (_b, eight) = full_pipeline(8);
    let (_c, again) = full_pipeline(1);
    let differing: Vec<String> = one
        .keys()
        .chain(eight.keys())
        .filter(|k| one.get(*k) != eight.get(*k) || one.get(*k) != again.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    verdict(
        differing.is_empty() && one.contains_key(Path::new(files::REPORT_JSON)),
        if differing.is_empty() {
            format!("{} output files byte-identical across runs and 1 vs 8 threads", one.len())
        } else {
            format!("differing files: {differing:?}")
        },
    )
}

// ---------------------------------------------------------------- real data

fn real_data() -> Verdict {
    let Some(dir) = std::env::var_os("READMIT_MIMIC_DIR").map(PathBuf::from) else {
        return Verdict::Skip("optional; set READMIT_MIMIC_DIR to run".into());
    };
    let out = TempDir::new().unwrap();
    let config = PipelineConfig {
        admissions: Some(dir.join("ADMISSIONS.csv")),
        notes: Some(dir.join("NOTEEVENTS.csv")),
        output_dir: out.path().to_path_buf(),
        classifiers: vec![ClassifierKind::LogisticRegression],
        feature_sets: vec!["bow".into()],
        ..Default::default()
    };
    let stats = pipeline::cmd_cohort(&config).unwrap();
    pipeline::cmd_featurize(&config, None).unwrap();
    let report = pipeline::cmd_evaluate(&config).unwrap();
    let rate = stats.positive_count as f64 / stats.retained_count as f64;
    let auc = test_auc(&report, ClassifierKind::LogisticRegression);
    let size_ok = (stats.retained_count as f64 - 45_305.0).abs() <= 0.05 * 45_305.0;
    verdict(
        size_ok && (0.05..=0.06).contains(&rate) && (auc - 0.74).abs() <= 0.05,
        format!("cohort {}, positive rate {rate:.4}, BoW logistic AUC {auc:.3}", stats.retained_count),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("auc-oracle-equivalence", auc_oracle),
        ("roc-consistency", roc_consistency),
        ("logistic-gradient-check", gradient_check),
        ("planted-signal-recovery", planted_signal),
        ("null-signal-control", null_signal),
        ("importance-recovery", importance_recovery),
        ("cohort-fixture", cohort_fixture),
        ("porter-conformance", porter_conformance),
        ("determinism", determinism),
        ("real-data-check", real_data),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match result {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name:<26} {detail} [{secs:.1}s]");
    }
    println!("acceptance: {} criteria run, {failed} failed", ran);
    if failed > 0 {
        std::process::exit(1);
    }
}
