use std::fmt;
use std::io::BufRead;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::csv::{Header, Reader};
use crate::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";
pub const DISCHARGE_SUMMARY: &str = "Discharge summary";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AdmissionType {
    Emergency,
    Urgent,
    Elective,
    Newborn,
}

impl AdmissionType {
    /// Case-insensitive, whitespace-trimmed match.
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_uppercase().as_str() {
            "EMERGENCY" => Some(AdmissionType::Emergency),
            "URGENT" => Some(AdmissionType::Urgent),
            "ELECTIVE" => Some(AdmissionType::Elective),
            "NEWBORN" => Some(AdmissionType::Newborn),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AdmissionType::Emergency => "EMERGENCY",
            AdmissionType::Urgent => "URGENT",
            AdmissionType::Elective => "ELECTIVE",
            AdmissionType::Newborn => "NEWBORN",
        }
    }
}

impl fmt::Display for AdmissionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionRecord {
    pub row_id: i64,
    pub subject_id: i64,
    pub hadm_id: i64,
    pub admit_time: NaiveDateTime,
    pub discharge_time: NaiveDateTime,
    pub death_time: Option<NaiveDateTime>,
    pub admission_type: AdmissionType,
    pub hospital_expire_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteRecord {
    pub row_id: i64,
    pub subject_id: i64,
    pub hadm_id: i64,
    pub category: String,
    pub text: String,
}

const ADMISSION_COLUMNS: [&str; 8] = [
    "ROW_ID",
    "SUBJECT_ID",
    "HADM_ID",
    "ADMITTIME",
    "DISCHTIME",
    "DEATHTIME",
    "ADMISSION_TYPE",
    "HOSPITAL_EXPIRE_FLAG",
];

const NOTE_COLUMNS: [&str; 5] = ["ROW_ID", "SUBJECT_ID", "HADM_ID", "CATEGORY", "TEXT"];

struct Row<'a> {
    source: &'a str,
    row: usize,
    fields: &'a [String],
}

impl Row<'_> {
    fn err(&self, column: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source.to_string(),
            row: self.row,
            column: column.to_string(),
            message: message.into(),
        }
    }

    fn get(&self, idx: usize, column: &str) -> Result<&str> {
        self.fields.get(idx).map(String::as_str).ok_or_else(|| self.err(column, "row has too few fields"))
    }

    fn int(&self, idx: usize, column: &str) -> Result<i64> {
        let raw = self.get(idx, column)?.trim();
        raw.parse().map_err(|_| self.err(column, format!("expected an integer, found {raw:?}")))
    }

    fn timestamp(&self, idx: usize, column: &str) -> Result<Option<NaiveDateTime>> {
        let raw = self.get(idx, column)?.trim();
        if raw.is_empty() {
            return Ok(None);
        }
        NaiveDateTime::parse_from_str(raw, TIMESTAMP_FORMAT).map(Some).map_err(|_| {
            self.err(column, format!("malformed timestamp {raw:?}, expected YYYY-MM-DD HH:MM:SS"))
        })
    }

    fn required_timestamp(&self, idx: usize, column: &str) -> Result<NaiveDateTime> {
        self.timestamp(idx, column)?.ok_or_else(|| self.err(column, "timestamp is required"))
    }
}

/// Parses an ADMISSIONS-style CSV stream. Column order is free; extra
/// columns are ignored.
pub fn parse_admissions<R: BufRead>(stream: R, source_name: &str) -> Result<Vec<AdmissionRecord>> {
    let mut reader = Reader::new(stream);
    let Some(header) = reader.next_record()? else {
        return Err(Error::Parse {
            source_name: source_name.to_string(),
            row: 0,
            column: "ROW_ID".into(),
            message: "missing header row".into(),
        });
    };
    let cols = Header::new(&header).require(source_name, &ADMISSION_COLUMNS)?;
    let mut out = Vec::new();
    let mut row = 0;
    while let Some(fields) = reader.next_record()? {
        row += 1;
        let r = Row { source: source_name, row, fields: &fields };
        let type_raw = r.get(cols[6], "ADMISSION_TYPE")?;
        let admission_type = AdmissionType::parse(type_raw)
            .ok_or_else(|| r.err("ADMISSION_TYPE", format!("unknown admission type {type_raw:?}")))?;
        let flag_raw = r.get(cols[7], "HOSPITAL_EXPIRE_FLAG")?.trim();
        let hospital_expire_flag = match flag_raw.to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(r.err("HOSPITAL_EXPIRE_FLAG", format!("expected 0 or 1, found {flag_raw:?}"))),
        };
        let rec = AdmissionRecord {
            row_id: r.int(cols[0], "ROW_ID")?,
            subject_id: r.int(cols[1], "SUBJECT_ID")?,
            hadm_id: r.int(cols[2], "HADM_ID")?,
            admit_time: r.required_timestamp(cols[3], "ADMITTIME")?,
            discharge_time: r.required_timestamp(cols[4], "DISCHTIME")?,
            death_time: r.timestamp(cols[5], "DEATHTIME")?,
            admission_type,
            hospital_expire_flag,
        };
        if rec.discharge_time < rec.admit_time {
            return Err(r.err("DISCHTIME", "discharge precedes admission"));
        }
        if rec.hospital_expire_flag && rec.death_time.is_none() {
            return Err(r.err("DEATHTIME", "expire flag set but death time is empty"));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Parses a NOTEEVENTS-style CSV stream, keeping rows whose category
/// matches `category_filter` (trimmed, case-insensitive).
pub fn parse_notes<R: BufRead>(
    stream: R,
    source_name: &str,
    category_filter: &str,
) -> Result<Vec<NoteRecord>> {
    let wanted = category_filter.trim().to_lowercase();
    let mut reader = Reader::new(stream);
    let Some(header) = reader.next_record()? else {
        return Ok(Vec::new());
    };
    let cols = Header::new(&header).require(source_name, &NOTE_COLUMNS)?;
    let mut out = Vec::new();
    let mut row = 0;
    while let Some(fields) = reader.next_record()? {
        row += 1;
        let r = Row { source: source_name, row, fields: &fields };
        let category = r.get(cols[3], "CATEGORY")?;
        if category.trim().to_lowercase() != wanted {
            continue;
        }
        // MIMIC leaves HADM_ID empty for some outpatient notes; they cannot
        // join to an admission.
        if r.get(cols[2], "HADM_ID")?.trim().is_empty() {
            continue;
        }
        out.push(NoteRecord {
            row_id: r.int(cols[0], "ROW_ID")?,
            subject_id: r.int(cols[1], "SUBJECT_ID")?,
            hadm_id: r.int(cols[2], "HADM_ID")?,
            category: category.trim().to_string(),
            text: r.get(cols[4], "TEXT")?.to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).unwrap()
    }

    const ADMISSIONS: &str = "\
HADM_ID,ROW_ID,SUBJECT_ID,ADMITTIME,DISCHTIME,DEATHTIME,ADMISSION_TYPE,HOSPITAL_EXPIRE_FLAG,INSURANCE
100,1,10,2101-01-01 08:00:00,2101-01-05 12:30:00,,EMERGENCY,0,Medicare
101,2,11,2102-03-04 00:00:00,2102-03-04 09:00:00,,newborn ,0,Private
102,3,12,2103-07-10 10:00:00,2103-07-20 10:00:00,2103-07-20 10:00:00,Urgent,1,Medicaid
";

    #[test]
    fn three_row_fixture() {
        let got = parse_admissions(ADMISSIONS.as_bytes(), "adm.csv").unwrap();
        let want = vec![
            AdmissionRecord {
                row_id: 1,
                subject_id: 10,
                hadm_id: 100,
                admit_time: ts("2101-01-01 08:00:00"),
                discharge_time: ts("2101-01-05 12:30:00"),
                death_time: None,
                admission_type: AdmissionType::Emergency,
                hospital_expire_flag: false,
            },
            AdmissionRecord {
                row_id: 2,
                subject_id: 11,
                hadm_id: 101,
                admit_time: ts("2102-03-04 00:00:00"),
                discharge_time: ts("2102-03-04 09:00:00"),
                death_time: None,
                admission_type: AdmissionType::Newborn,
                hospital_expire_flag: false,
            },
            AdmissionRecord {
                row_id: 3,
                subject_id: 12,
                hadm_id: 102,
                admit_time: ts("2103-07-10 10:00:00"),
                discharge_time: ts("2103-07-20 10:00:00"),
                death_time: Some(ts("2103-07-20 10:00:00")),
                admission_type: AdmissionType::Urgent,
                hospital_expire_flag: true,
            },
        ];
        assert_eq!(got, want);
    }

    fn parse_err(input: &str) -> (usize, String) {
        match parse_admissions(input.as_bytes(), "adm.csv") {
            Err(Error::Parse { row, column, .. }) => (row, column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn error_names_row_and_column() {
        let header =
            "ROW_ID,SUBJECT_ID,HADM_ID,ADMITTIME,DISCHTIME,DEATHTIME,ADMISSION_TYPE,HOSPITAL_EXPIRE_FLAG\n";
        let good = "1,1,1,2100-01-01 00:00:00,2100-01-02 00:00:00,,EMERGENCY,0\n";
        let bad_ts = "2,1,2,2100-01-01,2100-01-02 00:00:00,,EMERGENCY,0\n";
        assert_eq!(parse_err(&format!("{header}{good}{bad_ts}")), (2, "ADMITTIME".to_string()));
        let bad_type = "2,1,2,2100-01-01 00:00:00,2100-01-02 00:00:00,,TRAUMA,0\n";
        assert_eq!(parse_err(&format!("{header}{bad_type}")), (1, "ADMISSION_TYPE".to_string()));
        let no_flag = "ROW_ID,SUBJECT_ID,HADM_ID,ADMITTIME,DISCHTIME,DEATHTIME,ADMISSION_TYPE\n";
        assert_eq!(parse_err(no_flag), (0, "HOSPITAL_EXPIRE_FLAG".to_string()));
    }

    const NOTES: &str = "\
ROW_ID,SUBJECT_ID,HADM_ID,CHARTDATE,CATEGORY,DESCRIPTION,TEXT
1,10,100,2101-01-05,Discharge summary,Report,\"Admission Date: ...
Patient did well.\"
2,10,100,2101-01-03,Radiology,CHEST,Clear lungs.
3,11,101,2102-03-04, discharge SUMMARY ,Report,Short note
";

    #[test]
    fn filters_category_and_keeps_newlines() {
        let notes = parse_notes(NOTES.as_bytes(), "notes.csv", DISCHARGE_SUMMARY).unwrap();
        assert_eq!(notes.len(), 2);
        assert_eq!(notes[0].text, "Admission Date: ...\nPatient did well.");
        assert_eq!(notes[1].hadm_id, 101);
        let radiology = parse_notes(NOTES.as_bytes(), "notes.csv", "radiology").unwrap();
        assert_eq!(radiology.len(), 1);
    }

    #[test]
    fn header_only_is_empty() {
        let notes =
            parse_notes("ROW_ID,SUBJECT_ID,HADM_ID,CATEGORY,TEXT\n".as_bytes(), "n", DISCHARGE_SUMMARY)
                .unwrap();
        assert!(notes.is_empty());
    }

    #[test]
    fn unbalanced_quote_is_an_error() {
        let input = "ROW_ID,SUBJECT_ID,HADM_ID,CATEGORY,TEXT\n1,1,1,Discharge summary,\"never closed\n";
        assert!(matches!(
            parse_notes(input.as_bytes(), "n", DISCHARGE_SUMMARY),
            Err(Error::Csv { offset: 64, .. })
        ));
    }
}
