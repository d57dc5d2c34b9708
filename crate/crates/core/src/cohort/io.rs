use std::io::{BufRead, Write};

use super::{CohortStats, Subject};
use crate::{Error, Result};

/// Writes one JSON object per line.
pub fn write_cohort<W: Write>(out: &mut W, subjects: &[Subject]) -> Result<()> {
    for s in subjects {
        serde_json::to_writer(&mut *out, s)?;
        out.write_all(b"\n").map_err(|e| Error::io("cohort", e))?;
    }
    Ok(())
}

pub fn read_cohort<R: BufRead>(input: R, source_name: &str) -> Result<Vec<Subject>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let subject: Subject = serde_json::from_str(&line).map_err(|e| Error::Line {
            source_name: source_name.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(subject);
    }
    Ok(out)
}

pub fn write_histogram_csv<W: Write>(out: &mut W, stats: &CohortStats) -> std::io::Result<()> {
    writeln!(out, "bucket_days,count")?;
    for (bucket, count) in &stats.interval_histogram {
        writeln!(out, "{bucket},{count}")?;
    }
    Ok(())
}
