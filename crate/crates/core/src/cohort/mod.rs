//! Cohort construction from admission and note tables.
//!
//! Each eligible hospital admission becomes one [`Subject`] labelled with
//! whether an unplanned (non-ELECTIVE) readmission followed within the
//! window. Admissions are excluded in a fixed order: NEWBORN, died in
//! hospital, no discharge summary, more than one discharge summary.

mod build;
mod io;
mod parse;

pub use build::{build_cohort, readmission_label, CohortStats, Subject, DEFAULT_WINDOW_DAYS};
pub use io::{read_cohort, write_cohort, write_histogram_csv};
pub use parse::{
    parse_admissions, parse_notes, AdmissionRecord, AdmissionType, NoteRecord, DISCHARGE_SUMMARY,
    TIMESTAMP_FORMAT,
};
