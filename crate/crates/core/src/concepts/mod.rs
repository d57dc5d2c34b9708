//! Bag-of-CUIs featurization.
//!
//! Concepts come either from the built-in dictionary mapper
//! ([`map_concepts`] over a [`ConceptLexicon`]) or from annotations produced
//! by an external concept recognizer ([`import_annotations`]). Either way the
//! per-document CUI multisets go through the same df filtering and tf-idf
//! weighting as words.

mod annotations;
mod lexicon;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use annotations::{import_annotations, ConceptAnnotation};
pub use lexicon::{load_lexicon, map_concepts, ConceptEntry, ConceptLexicon};

use crate::cohort::Subject;
use crate::sparse::Dataset;
use crate::text::{stem_all, tokenize, vectorize_tfidf, Vocabulary, VocabularySettings};
use crate::{par, Error, Result};

/// Concept Unique Identifier: `C` followed by seven digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Cui(String);

impl Cui {
    pub fn parse(raw: &str) -> Option<Cui> {
        let b = raw.as_bytes();
        (b.len() == 8 && b[0] == b'C' && b[1..].iter().all(u8::is_ascii_digit)).then(|| Cui(raw.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Cui {
    type Error = String;

    fn try_from(value: String) -> std::result::Result<Self, String> {
        Cui::parse(&value).ok_or_else(|| format!("malformed CUI {value:?}"))
    }
}

impl From<Cui> for String {
    fn from(c: Cui) -> String {
        c.0
    }
}

impl fmt::Display for Cui {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Runs the dictionary mapper over every subject's summary.
pub fn annotate_cohort(subjects: &[Subject], lexicon: &ConceptLexicon) -> Vec<ConceptAnnotation> {
    par::map(subjects, |s| {
        let stems = stem_all(&tokenize(&s.summary_text));
        ConceptAnnotation { doc_id: s.hadm_id, cuis: map_concepts(&stems, lexicon) }
    })
}

/// Joins annotations to the cohort by `hadm_id` and builds the Bag-of-CUIs
/// vocabulary and dataset. Rows follow cohort order.
pub fn vectorize_cuis(
    annotations: &[ConceptAnnotation],
    cohort: &[Subject],
    settings: VocabularySettings,
) -> Result<(Vocabulary, Dataset)> {
    let by_doc: HashMap<i64, &ConceptAnnotation> = annotations.iter().map(|a| (a.doc_id, a)).collect();
    let missing: Vec<i64> = cohort.iter().map(|s| s.hadm_id).filter(|id| !by_doc.contains_key(id)).collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "{} cohort subjects have no concept annotation: {missing:?}",
            missing.len()
        )));
    }
    let docs: Vec<Vec<&str>> =
        cohort.iter().map(|s| by_doc[&s.hadm_id].cuis.iter().map(Cui::as_str).collect()).collect();
    let vocab = Vocabulary::from_documents(&docs, settings)?;
    let vectors = par::map(&docs, |d| vectorize_tfidf(d, &vocab));
    let dataset = Dataset::with_ids(
        vectors,
        cohort.iter().map(|s| s.label).collect(),
        cohort.iter().map(|s| s.hadm_id).collect(),
        vocab.len(),
    )?;
    Ok((vocab, dataset))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cui_shape() {
        assert!(Cui::parse("C0018946").is_some());
        for bad in ["C00", "X0018946", "C001894a", "c0018946", "C00189460"] {
            assert!(Cui::parse(bad).is_none(), "{bad}");
        }
    }

    fn subject(id: i64, label: bool) -> Subject {
        Subject {
            hadm_id: id,
            subject_id: id,
            label,
            interval_days: label.then_some(3.0),
            summary_text: String::new(),
        }
    }

    fn ann(id: i64, cuis: &[&str]) -> ConceptAnnotation {
        ConceptAnnotation { doc_id: id, cuis: cuis.iter().map(|c| Cui::parse(c).unwrap()).collect() }
    }

    #[test]
    fn ubiquitous_cui_excluded() {
        let cohort: Vec<Subject> = (0..6).map(|i| subject(i, i % 2 == 0)).collect();
        let anns: Vec<_> = (0..6)
            .map(|i| if i < 5 { ann(i, &["C0000001", "C0000002"]) } else { ann(i, &["C0000001"]) })
            .collect();
        let (vocab, ds) = vectorize_cuis(&anns, &cohort, VocabularySettings::default()).unwrap();
        // C0000001 is in 6/6 documents (> 0.95), C0000002 in 5/6 (floor(5.7) = 5).
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.term(0), Some("C0000002"));
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.ids(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn hundred_doc_thresholds() {
        let cohort: Vec<Subject> = (0..100).map(|i| subject(i, i < 10)).collect();
        let anns: Vec<_> = (0..100)
            .map(|i| match i {
                0..=4 => ann(i, &["C0000001"]),
                5..=9 => ann(i, &["C0000002"]),
                _ => ann(i, &["C0000003"][..(i % 2) as usize]),
            })
            .collect();
        let (vocab, _) = vectorize_cuis(&anns, &cohort, VocabularySettings::default()).unwrap();
        // C0000003 appears in 45 docs and also survives.
        assert_eq!(vocab.len(), 3);
        let anns: Vec<_> = (0..100)
            .map(|i| match i {
                0..=4 => ann(i, &["C0000001"]),
                5..=9 => ann(i, &["C0000002"]),
                _ => ann(i, &[]),
            })
            .collect();
        let (vocab, ds) = vectorize_cuis(&anns, &cohort, VocabularySettings::default()).unwrap();
        assert_eq!(vocab.len(), 2);
        assert_eq!(ds.vectors()[50].nnz(), 0);
    }

    #[test]
    fn empty_annotations_fail() {
        let cohort: Vec<Subject> = (0..10).map(|i| subject(i, i < 3)).collect();
        let anns: Vec<_> = (0..10).map(|i| ann(i, &[])).collect();
        assert!(matches!(vectorize_cuis(&anns, &cohort, VocabularySettings::default()), Err(Error::Data(_))));
    }

    #[test]
    fn missing_annotation_listed() {
        let cohort: Vec<Subject> = (0..3).map(|i| subject(i, i == 0)).collect();
        let anns = vec![ann(0, &["C0000001"]), ann(2, &["C0000001"])];
        match vectorize_cuis(&anns, &cohort, VocabularySettings::default()) {
            Err(Error::Data(msg)) => assert!(msg.contains("[1]")),
            other => panic!("{other:?}"),
        }
    }
}
