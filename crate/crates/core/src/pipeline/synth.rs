//! Synthetic ADMISSIONS/NOTEEVENTS tables with a planted text signal.
//!
//! Admissions come in per-patient chains. After each stay the next
//! unplanned admission follows within the window with probability
//! `positive_rate`; otherwise the chain either continues after a longer gap
//! or ends. Newborn stays, in-hospital deaths, elective detours and
//! missing or duplicated summaries are mixed in so every exclusion and skip
//! rule fires. Labels are then computed with the real labelling rule and
//! each summary is drawn from a Zipf background vocabulary, plus planted
//! signal terms with probability `signal_strength` for readmitted stays and
//! `signal_strength / 5` otherwise.

use std::collections::HashSet;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{readmission_label, AdmissionRecord, AdmissionType, DISCHARGE_SUMMARY, TIMESTAMP_FORMAT};
use crate::text::{porter_stem, Stopwords};
use crate::{csv, par, rng, Error, Result};

const NEWBORN_RATE: f64 = 0.03;
const EXPIRE_RATE: f64 = 0.03;
const ELECTIVE_RATE: f64 = 0.08;
const ELECTIVE_DETOUR_RATE: f64 = 0.05;
const CONTINUE_RATE: f64 = 0.35;
const NO_SUMMARY_RATE: f64 = 0.02;
const DOUBLE_SUMMARY_RATE: f64 = 0.02;
const RADIOLOGY_RATE: f64 = 0.25;
/// Negatives see each planted term this many times less often.
pub const NEGATIVE_SIGNAL_FACTOR: f64 = 5.0;
const WINDOW_HOURS: i64 = 30 * 24;
const SYNTH_CUI_BASE: u32 = 9_000_000;
const LEXICON_SINGLE_TERMS: usize = 300;
const LEXICON_PHRASES: usize = 20;

/// Words present in every summary; the document-frequency ceiling drops them.
const TEMPLATE: &str = "Admission Date Discharge Date Service MEDICINE History of Present Illness";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Number of admission rows to generate.
    pub n_subjects: usize,
    pub positive_rate: f64,
    pub n_signal_terms: usize,
    pub signal_strength: f64,
    /// Distinct content words, planted terms included.
    pub vocabulary_size: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_subjects: 2000,
            positive_rate: 0.06,
            n_signal_terms: 10,
            signal_strength: 0.8,
            vocabulary_size: 2000,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        if self.n_subjects == 0 {
            return bad("n_subjects must be positive".into());
        }
        if !(self.positive_rate > 0.0 && self.positive_rate < 1.0) {
            return bad(format!("positive_rate must be in (0, 1), got {}", self.positive_rate));
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return bad(format!("signal_strength must be in [0, 1], got {}", self.signal_strength));
        }
        if self.n_signal_terms >= self.vocabulary_size {
            return bad(format!(
                "n_signal_terms ({}) must be below vocabulary_size ({})",
                self.n_signal_terms, self.vocabulary_size
            ));
        }
        if self.vocabulary_size > 100_000 {
            return bad(format!("vocabulary_size {} exceeds 100000", self.vocabulary_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub admissions_csv: String,
    pub notes_csv: String,
    /// `phrase<TAB>CUI<TAB>name` lines covering the most frequent words and
    /// every planted term.
    pub lexicon_tsv: String,
    /// Planted terms; each is its own Porter stem.
    pub planted_terms: Vec<String>,
}

/// Pronounceable letters-only words that are their own stem, are not
/// stopwords and do not collide with template words.
fn pseudo_words(n: usize, rng: &mut rng::Rng) -> Vec<String> {
    const ONSETS: [&str; 16] =
        ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    const CODAS: [&str; 6] = ["", "", "n", "r", "x", "m"];
    let stop = Stopwords::pubmed();
    let mut taken: HashSet<String> = TEMPLATE.split(' ').map(|w| porter_stem(&w.to_lowercase())).collect();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
        }
        w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
        if porter_stem(&w) == w && !stop.contains(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn hours(h: i64) -> Duration {
    Duration::hours(h)
}

fn admissions(spec: &SynthSpec) -> Vec<AdmissionRecord> {
    let mut r = rng::stream(rng::derive(spec.seed, &[1]));
    let epoch = NaiveDate::from_ymd_opt(2100, 1, 1).and_then(|d| d.and_hms_opt(0, 0, 0)).unwrap_or_default();
    let mut out: Vec<AdmissionRecord> = Vec::with_capacity(spec.n_subjects);
    let mut subject_id = 0;
    let push = |out: &mut Vec<AdmissionRecord>, subject_id, admit: NaiveDateTime, disch, kind, died: bool| {
        let n = out.len() as i64;
        out.push(AdmissionRecord {
            row_id: n + 1,
            subject_id,
            hadm_id: 100_000 + n,
            admit_time: admit,
            discharge_time: disch,
            death_time: died.then_some(disch),
            admission_type: kind,
            hospital_expire_flag: died,
        });
    };
    while out.len() < spec.n_subjects {
        subject_id += 1;
        let mut t = epoch + hours(r.gen_range(0..3650 * 24));
        if r.gen_bool(NEWBORN_RATE) {
            let disch = t + hours(r.gen_range(48..120));
            push(&mut out, subject_id, t, disch, AdmissionType::Newborn, false);
            t = disch + hours(r.gen_range(365 * 24..2000 * 24));
        }
        while out.len() < spec.n_subjects {
            let kind = if r.gen_bool(ELECTIVE_RATE) {
                AdmissionType::Elective
            } else if r.gen_bool(0.85) {
                AdmissionType::Emergency
            } else {
                AdmissionType::Urgent
            };
            let disch = t + hours(r.gen_range(24..14 * 24));
            let died = r.gen_bool(EXPIRE_RATE);
            push(&mut out, subject_id, t, disch, kind, died);
            if died {
                break;
            }
            let gap = if r.gen_bool(spec.positive_rate) {
                r.gen_range(1..=WINDOW_HOURS)
            } else if r.gen_bool(CONTINUE_RATE) {
                r.gen_range(WINDOW_HOURS + 24..=2 * 365 * 24)
            } else {
                break;
            };
            if gap > 96 && r.gen_bool(ELECTIVE_DETOUR_RATE) && out.len() < spec.n_subjects {
                let start = disch + hours(gap / 4);
                let end = start + hours((gap / 4).min(48));
                push(&mut out, subject_id, start, end, AdmissionType::Elective, false);
            }
            t = disch + hours(gap);
        }
    }
    out
}

fn labels(admissions: &[AdmissionRecord]) -> Vec<bool> {
    let mut out = Vec::with_capacity(admissions.len());
    for chain in admissions.chunk_by(|a, b| a.subject_id == b.subject_id) {
        for i in 0..chain.len() {
            out.push(readmission_label(chain, i, 30).map(|(l, _)| l).unwrap_or(false));
        }
    }
    out
}

struct Words<'a> {
    signal: &'a [String],
    background: &'a [String],
    zipf: WeightedIndex<f64>,
}

fn summary_text(r: &mut rng::Rng, label: bool, strength: f64, words: &Words<'_>) -> String {
    let len = r.gen_range(120..320);
    let mut body: Vec<&str> = (0..len).map(|_| words.background[words.zipf.sample(r)].as_str()).collect();
    let p = if label { strength } else { strength / NEGATIVE_SIGNAL_FACTOR };
    for term in words.signal {
        if r.gen_bool(p) {
            for _ in 0..r.gen_range(1..=2) {
                let at = r.gen_range(0..=body.len());
                body.insert(at, term);
            }
        }
    }
    let mut text = format!(
        "Admission Date: [**2101-{}-{}**] Discharge Date: [**2101-{}-{}**]\nService: MEDICINE\n\nHistory of Present Illness:\n",
        r.gen_range(1..=12),
        r.gen_range(1..=28),
        r.gen_range(1..=12),
        r.gen_range(1..=28)
    );
    for (i, sentence) in body.chunks(12).enumerate() {
        text.push_str(&sentence.join(" "));
        text.push('.');
        if r.gen_bool(0.1) {
            text.push_str(&format!(
                " BP {}/{}, HR {}.",
                r.gen_range(90..160),
                r.gen_range(50..95),
                r.gen_range(55..120)
            ));
        }
        text.push(if i % 4 == 3 { '\n' } else { ' ' });
    }
    text.truncate(text.trim_end().len());
    text
}

fn radiology_text(r: &mut rng::Rng, words: &Words<'_>) -> String {
    let body: Vec<&str> =
        (0..r.gen_range(20..60)).map(|_| words.background[words.zipf.sample(r)].as_str()).collect();
    format!("CHEST (PORTABLE AP)\nFINDINGS: {}.", body.join(" "))
}

fn lexicon(words: &[String], n_signal: usize) -> String {
    let mut out = String::from("# synthetic lexicon: phrase, CUI, preferred name\n");
    let singles = words.len().min(LEXICON_SINGLE_TERMS.max(n_signal));
    for (i, w) in words.iter().take(singles).enumerate() {
        out.push_str(&format!("{w}\tC{:07}\t{w}\n", SYNTH_CUI_BASE + i as u32));
    }
    let pairs = words[n_signal..].chunks_exact(2).take(LEXICON_PHRASES);
    for (i, pair) in pairs.enumerate() {
        let phrase = pair.join(" ");
        out.push_str(&format!("{phrase}\tC{:07}\t{phrase}\n", SYNTH_CUI_BASE + 500_000 + i as u32));
    }
    out
}

fn timestamp(t: NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut word_rng = rng::stream(rng::derive(spec.seed, &[0]));
    let vocab = pseudo_words(spec.vocabulary_size, &mut word_rng);
    let (signal, background) = vocab.split_at(spec.n_signal_terms);
    let weights: Vec<f64> = (0..background.len()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let words = Words {
        signal,
        background,
        zipf: WeightedIndex::new(&weights).map_err(|e| Error::Contract(e.to_string()))?,
    };

    let adms = admissions(spec);
    let labels = labels(&adms);

    let mut admissions_csv = Vec::new();
    let io = |e| Error::io("<memory>", e);
    csv::write_record(
        &mut admissions_csv,
        &[
            "ROW_ID",
            "SUBJECT_ID",
            "HADM_ID",
            "ADMITTIME",
            "DISCHTIME",
            "DEATHTIME",
            "ADMISSION_TYPE",
            "HOSPITAL_EXPIRE_FLAG",
        ],
    )
    .map_err(io)?;
    for a in &adms {
        csv::write_record(
            &mut admissions_csv,
            &[
                a.row_id.to_string(),
                a.subject_id.to_string(),
                a.hadm_id.to_string(),
                timestamp(a.admit_time),
                timestamp(a.discharge_time),
                a.death_time.map(timestamp).unwrap_or_default(),
                a.admission_type.as_str().to_string(),
                u8::from(a.hospital_expire_flag).to_string(),
            ],
        )
        .map_err(io)?;
    }

    // Each admission's notes come from their own stream, so generation can
    // run in parallel without changing the output.
    let units: Vec<usize> = (0..adms.len()).collect();
    let per_admission: Vec<Vec<(String, String)>> = par::map(&units, |&i| {
        let a = &adms[i];
        let mut r = rng::stream(rng::derive(spec.seed, &[2, a.hadm_id as u64]));
        let n_summaries = if r.gen_bool(NO_SUMMARY_RATE) {
            0
        } else if r.gen_bool(DOUBLE_SUMMARY_RATE) {
            2
        } else {
            1
        };
        let mut notes: Vec<(String, String)> = (0..n_summaries)
            .map(|_| {
                (DISCHARGE_SUMMARY.to_string(), summary_text(&mut r, labels[i], spec.signal_strength, &words))
            })
            .collect();
        if r.gen_bool(RADIOLOGY_RATE) {
            notes.push(("Radiology".to_string(), radiology_text(&mut r, &words)));
        }
        notes
    });

    let mut notes_csv = Vec::new();
    csv::write_record(
        &mut notes_csv,
        &["ROW_ID", "SUBJECT_ID", "HADM_ID", "CHARTDATE", "CATEGORY", "DESCRIPTION", "TEXT"],
    )
    .map_err(io)?;
    let mut row_id = 0;
    for (a, notes) in adms.iter().zip(&per_admission) {
        for (category, text) in notes {
            row_id += 1;
            csv::write_record(
                &mut notes_csv,
                &[
                    row_id.to_string(),
                    a.subject_id.to_string(),
                    a.hadm_id.to_string(),
                    a.discharge_time.date().to_string(),
                    category.clone(),
                    "Report".to_string(),
                    text.clone(),
                ],
            )
            .map_err(io)?;
        }
    }

    let utf8 = |b: Vec<u8>| String::from_utf8(b).map_err(|e| Error::Data(e.to_string()));
    Ok(SynthCorpus {
        admissions_csv: utf8(admissions_csv)?,
        notes_csv: utf8(notes_csv)?,
        lexicon_tsv: lexicon(&vocab, spec.n_signal_terms),
        planted_terms: signal.to_vec(),
    })
}
