use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::parse::{AdmissionRecord, AdmissionType, NoteRecord};
use crate::{Error, Result};

pub const DEFAULT_WINDOW_DAYS: u32 = 30;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub hadm_id: i64,
    pub subject_id: i64,
    pub label: bool,
    /// Days from index discharge to the qualifying readmission; present iff `label`.
    pub interval_days: Option<f64>,
    pub summary_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub input_admissions: usize,
    pub newborn: usize,
    pub expired: usize,
    pub no_summary: usize,
    pub multiple_summaries: usize,
    pub retained_count: usize,
    pub positive_count: usize,
    pub window_days: u32,
    /// `(bucket start day, count)`; bucket `b` covers `[b, b + 1)` days and
    /// the last bucket also takes intervals equal to the window.
    pub interval_histogram: Vec<(u32, usize)>,
}

impl CohortStats {
    pub fn excluded(&self) -> usize {
        self.newborn + self.expired + self.no_summary + self.multiple_summaries
    }
}

/// Labels `admissions[index]` within one patient's time-ordered admissions.
///
/// ELECTIVE admissions after the index are skipped; the first non-ELECTIVE
/// one is the candidate readmission. The label is true when the candidate is
/// admitted no more than `window_days` after the index discharge. Overlapping
/// stays (candidate admitted before the index discharge) count as interval 0.
pub fn readmission_label(
    admissions: &[AdmissionRecord],
    index: usize,
    window_days: u32,
) -> Result<(bool, Option<f64>)> {
    if index >= admissions.len() {
        return Err(Error::Contract(format!(
            "index {index} out of range for {} admissions",
            admissions.len()
        )));
    }
    if window_days == 0 {
        return Err(Error::Contract("window_days must be positive".into()));
    }
    if let Some(w) = admissions.windows(2).position(|w| w[1].admit_time < w[0].admit_time) {
        return Err(Error::Contract(format!(
            "admissions not sorted by admit time (hadm_id {} precedes {})",
            admissions[w].hadm_id,
            admissions[w + 1].hadm_id
        )));
    }

    let anchor = admissions[index].discharge_time;
    let candidate = admissions[index + 1..].iter().find(|a| a.admission_type != AdmissionType::Elective);
    let Some(candidate) = candidate else {
        return Ok((false, None));
    };
    let seconds = (candidate.admit_time - anchor).num_seconds().max(0);
    let days = seconds as f64 / SECONDS_PER_DAY;
    if days <= f64::from(window_days) {
        Ok((true, Some(days)))
    } else {
        Ok((false, None))
    }
}

/// Applies the exclusion rules and labels every retained admission.
///
/// Notes join to admissions on `(subject_id, hadm_id)`; notes with blank
/// text do not count as summaries. Excluded admissions still act as
/// readmission events for the patient's other stays. Subjects are returned
/// sorted by `hadm_id`.
pub fn build_cohort(
    admissions: &[AdmissionRecord],
    notes: &[NoteRecord],
    window_days: u32,
) -> Result<(Vec<Subject>, CohortStats)> {
    let mut seen = HashSet::with_capacity(admissions.len());
    let mut duplicates: Vec<i64> =
        admissions.iter().filter(|a| !seen.insert(a.hadm_id)).map(|a| a.hadm_id).collect();
    if !duplicates.is_empty() {
        duplicates.sort_unstable();
        duplicates.dedup();
        return Err(Error::Data(format!("duplicate hadm_id in admissions: {duplicates:?}")));
    }

    let mut summaries: HashMap<(i64, i64), Vec<&NoteRecord>> = HashMap::new();
    for note in notes.iter().filter(|n| !n.text.trim().is_empty()) {
        summaries.entry((note.subject_id, note.hadm_id)).or_default().push(note);
    }

    let mut by_patient: BTreeMap<i64, Vec<&AdmissionRecord>> = BTreeMap::new();
    for a in admissions {
        by_patient.entry(a.subject_id).or_default().push(a);
    }

    let mut stats = CohortStats { input_admissions: admissions.len(), window_days, ..CohortStats::default() };
    let mut subjects = Vec::new();
    for stays in by_patient.values_mut() {
        stays.sort_by_key(|a| (a.admit_time, a.hadm_id));
        let ordered: Vec<AdmissionRecord> = stays.iter().map(|a| (*a).clone()).collect();
        for (i, adm) in ordered.iter().enumerate() {
            if adm.admission_type == AdmissionType::Newborn {
                stats.newborn += 1;
                continue;
            }
            if adm.hospital_expire_flag {
                stats.expired += 1;
                continue;
            }
            let text = match summaries.get(&(adm.subject_id, adm.hadm_id)).map(Vec::as_slice) {
                None | Some([]) => {
                    stats.no_summary += 1;
                    continue;
                }
                Some([only]) => only.text.clone(),
                Some(_) => {
                    stats.multiple_summaries += 1;
                    continue;
                }
            };
            let (label, interval_days) = readmission_label(&ordered, i, window_days)?;
            subjects.push(Subject {
                hadm_id: adm.hadm_id,
                subject_id: adm.subject_id,
                label,
                interval_days,
                summary_text: text,
            });
        }
    }
    subjects.sort_by_key(|s| s.hadm_id);

    stats.retained_count = subjects.len();
    stats.positive_count = subjects.iter().filter(|s| s.label).count();
    stats.interval_histogram = interval_histogram(&subjects, window_days);
    Ok((subjects, stats))
}

fn interval_histogram(subjects: &[Subject], window_days: u32) -> Vec<(u32, usize)> {
    let mut counts = vec![0usize; window_days as usize];
    for days in subjects.iter().filter_map(|s| s.interval_days) {
        let bucket = (days.floor() as usize).min(counts.len() - 1);
        counts[bucket] += 1;
    }
    counts.into_iter().enumerate().map(|(b, c)| (b as u32, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, NaiveDate, NaiveDateTime};

    fn day(d: f64) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2150, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
            + Duration::seconds((d * 86_400.0).round() as i64)
    }

    fn adm(hadm: i64, patient: i64, admit: f64, disch: f64, kind: AdmissionType) -> AdmissionRecord {
        AdmissionRecord {
            row_id: hadm,
            subject_id: patient,
            hadm_id: hadm,
            admit_time: day(admit),
            discharge_time: day(disch),
            death_time: None,
            admission_type: kind,
            hospital_expire_flag: false,
        }
    }

    fn note(hadm: i64, patient: i64) -> NoteRecord {
        NoteRecord {
            row_id: hadm * 10,
            subject_id: patient,
            hadm_id: hadm,
            category: "Discharge summary".into(),
            text: format!("summary {hadm}"),
        }
    }

    use AdmissionType::*;

    #[test]
    fn next_emergency_within_window() {
        let a = [adm(1, 1, -3.0, 0.0, Emergency), adm(2, 1, 10.0, 12.0, Emergency)];
        assert_eq!(readmission_label(&a, 0, 30).unwrap(), (true, Some(10.0)));
    }

    #[test]
    fn elective_is_skipped() {
        let a =
            [adm(1, 1, -3.0, 0.0, Emergency), adm(2, 1, 5.0, 6.0, Elective), adm(3, 1, 20.0, 22.0, Urgent)];
        assert_eq!(readmission_label(&a, 0, 30).unwrap(), (true, Some(20.0)));
    }

    #[test]
    fn last_admission_and_window_edge() {
        let a = [adm(1, 1, -3.0, 0.0, Emergency), adm(2, 1, 31.0, 33.0, Emergency)];
        assert_eq!(readmission_label(&a, 1, 30).unwrap(), (false, None));
        assert_eq!(readmission_label(&a, 0, 30).unwrap(), (false, None));
        let b = [adm(1, 1, -3.0, 0.0, Emergency), adm(2, 1, 30.0, 33.0, Emergency)];
        assert_eq!(readmission_label(&b, 0, 30).unwrap(), (true, Some(30.0)));
    }

    #[test]
    fn only_electives_follow() {
        let a = [adm(1, 1, -3.0, 0.0, Emergency), adm(2, 1, 3.0, 4.0, Elective)];
        assert_eq!(readmission_label(&a, 0, 30).unwrap(), (false, None));
    }

    #[test]
    fn unsorted_input_is_a_contract_violation() {
        let a = [adm(1, 1, 10.0, 12.0, Emergency), adm(2, 1, 0.0, 1.0, Emergency)];
        assert!(matches!(readmission_label(&a, 0, 30), Err(Error::Contract(_))));
    }

    #[test]
    fn two_patient_fixture() {
        let mut died = adm(1, 1, 0.0, 4.0, Emergency);
        died.hospital_expire_flag = true;
        died.death_time = Some(day(4.0));
        let admissions = vec![died, adm(2, 2, 0.0, 3.0, Emergency), adm(3, 2, 15.0, 16.0, Emergency)];
        // hadm 3 has no summary, so only hadm 2 is retained.
        let notes = vec![note(1, 1), note(2, 2)];
        let (subjects, stats) = build_cohort(&admissions, &notes, 30).unwrap();
        assert_eq!(subjects.len(), 1);
        assert_eq!(subjects[0].hadm_id, 2);
        assert!(subjects[0].label);
        assert_eq!(subjects[0].interval_days, Some(12.0));
        assert_eq!(stats.expired, 1);
        assert_eq!(stats.no_summary, 1);
        assert_eq!(stats.retained_count + stats.excluded(), admissions.len());
    }

    #[test]
    fn multiple_summaries_excluded() {
        let admissions = vec![adm(1, 1, 0.0, 2.0, Urgent)];
        let notes = vec![note(1, 1), note(1, 1)];
        let (subjects, stats) = build_cohort(&admissions, &notes, 30).unwrap();
        assert!(subjects.is_empty());
        assert_eq!(stats.multiple_summaries, 1);
    }

    #[test]
    fn empty_inputs() {
        let (subjects, stats) = build_cohort(&[], &[], 30).unwrap();
        assert!(subjects.is_empty());
        assert_eq!(stats.excluded(), 0);
        assert_eq!(stats.retained_count, 0);
        assert_eq!(stats.positive_count, 0);
    }

    #[test]
    fn duplicate_hadm_rejected() {
        let admissions = vec![adm(7, 1, 0.0, 1.0, Urgent), adm(7, 2, 0.0, 1.0, Urgent)];
        match build_cohort(&admissions, &[], 30) {
            Err(Error::Data(msg)) => assert!(msg.contains('7')),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn newborn_still_counts_as_readmission_event() {
        let admissions = vec![adm(1, 1, 0.0, 2.0, Urgent), adm(2, 1, 5.0, 6.0, Newborn)];
        let notes = vec![note(1, 1), note(2, 1)];
        let (subjects, stats) = build_cohort(&admissions, &notes, 30).unwrap();
        assert_eq!(stats.newborn, 1);
        assert_eq!(subjects[0].interval_days, Some(3.0));
    }
}
