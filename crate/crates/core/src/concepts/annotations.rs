use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::Cui;
use crate::{Error, Result};

/// CUI multiset for one document, keyed by `hadm_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptAnnotation {
    pub doc_id: i64,
    pub cuis: Vec<Cui>,
}

/// Reads JSON lines `{"doc_id": .., "cuis": [..]}`. Unknown doc ids are
/// accepted here and checked when joining to a cohort.
pub fn import_annotations<R: BufRead>(stream: R, source_name: &str) -> Result<Vec<ConceptAnnotation>> {
    let err =
        |line: usize, message: String| Error::Line { source_name: source_name.to_string(), line, message };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in stream.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ann: ConceptAnnotation = serde_json::from_str(&line).map_err(|e| err(i + 1, e.to_string()))?;
        if !seen.insert(ann.doc_id) {
            return Err(err(i + 1, format!("duplicate annotation for doc_id {}", ann.doc_id)));
        }
        out.push(ann);
    }
    Ok(out)
}
