use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{stem_terms, Stopwords, TokenStream};
use crate::sparse::SparseVector;
use crate::{par, Error, Result};

pub const DEFAULT_MIN_DOC_COUNT: usize = 5;
pub const DEFAULT_MAX_DOC_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocabularySettings {
    pub min_doc_count: usize,
    pub max_doc_fraction: f64,
}

impl Default for VocabularySettings {
    fn default() -> Self {
        VocabularySettings {
            min_doc_count: DEFAULT_MIN_DOC_COUNT,
            max_doc_fraction: DEFAULT_MAX_DOC_FRACTION,
        }
    }
}

impl VocabularySettings {
    pub fn validate(&self) -> Result<()> {
        if self.min_doc_count < 1 {
            return Err(Error::Contract("min_doc_count must be at least 1".into()));
        }
        if !(self.max_doc_fraction > 0.0 && self.max_doc_fraction <= 1.0) {
            return Err(Error::Contract(format!(
                "max_doc_fraction must be in (0, 1], got {}",
                self.max_doc_fraction
            )));
        }
        Ok(())
    }

    /// Largest document count a term may have: floor(fraction * corpus size).
    pub fn max_doc_count(&self, corpus_size: usize) -> usize {
        // The epsilon keeps e.g. 0.95 * 100 from landing on 94.999...
        (self.max_doc_fraction * corpus_size as f64 + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermStats {
    pub term: String,
    pub df: usize,
    pub idf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SettingsRecord {
    min_doc_count: usize,
    max_doc_fraction: f64,
    idf: String,
    normalization: String,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    settings: SettingsRecord,
    corpus_size: usize,
    terms: Vec<TermStats>,
}

const IDF_FORMULA: &str = "ln(corpus_size / df) + 1";
const NORMALIZATION: &str = "l2";

/// Ordered term index with document frequencies and idf weights.
///
/// Terms are sorted lexicographically, so index assignment depends only on
/// the surviving term set.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    settings: VocabularySettings,
    corpus_size: usize,
    terms: Vec<TermStats>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds from documents that are already term lists (stems or CUIs).
    ///
    /// Fails on an empty corpus and when no term survives the df filter.
    pub fn from_documents<S>(docs: &[Vec<S>], settings: VocabularySettings) -> Result<Self>
    where
        S: AsRef<str> + Sync,
    {
        settings.validate()?;
        if docs.is_empty() {
            return Err(Error::Contract("cannot build a vocabulary from an empty corpus".into()));
        }
        let per_doc: Vec<HashSet<&str>> =
            par::map_range(docs.len(), |i| docs[i].iter().map(AsRef::as_ref).collect());
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for set in &per_doc {
            for term in set {
                *df.entry(*term).or_default() += 1;
            }
        }

        let n = docs.len();
        let max_df = settings.max_doc_count(n);
        let terms: Vec<TermStats> = df
            .into_iter()
            .filter(|&(_, c)| c >= settings.min_doc_count && c <= max_df)
            .map(|(t, c)| TermStats { term: t.to_string(), df: c, idf: (n as f64 / c as f64).ln() + 1.0 })
            .collect();
        if terms.is_empty() {
            return Err(Error::Data(format!(
                "no term survives document-frequency filtering (corpus of {n}, df in [{}, {max_df}])",
                settings.min_doc_count
            )));
        }
        Ok(Self::from_parts(settings, n, terms))
    }

    fn from_parts(settings: VocabularySettings, corpus_size: usize, terms: Vec<TermStats>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.term.clone(), i)).collect();
        Vocabulary { settings, corpus_size, terms, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn settings(&self) -> VocabularySettings {
        self.settings
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn terms(&self) -> &[TermStats] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(|t| t.term.as_str())
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = VocabularyFile {
            settings: SettingsRecord {
                min_doc_count: self.settings.min_doc_count,
                max_doc_fraction: self.settings.max_doc_fraction,
                idf: IDF_FORMULA.into(),
                normalization: NORMALIZATION.into(),
            },
            corpus_size: self.corpus_size,
            terms: self.terms.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: VocabularyFile = serde_json::from_str(text)?;
        let settings = VocabularySettings {
            min_doc_count: file.settings.min_doc_count,
            max_doc_fraction: file.settings.max_doc_fraction,
        };
        settings.validate()?;
        let mut seen = HashSet::new();
        if let Some(dup) = file.terms.iter().find(|t| !seen.insert(t.term.as_str())) {
            return Err(Error::Data(format!("duplicate vocabulary term {:?}", dup.term)));
        }
        if file.terms.iter().any(|t| !(t.idf.is_finite() && t.idf > 0.0)) {
            return Err(Error::Data("vocabulary idf values must be positive".into()));
        }
        Ok(Self::from_parts(settings, file.corpus_size, file.terms))
    }
}

/// Builds a stem vocabulary from raw token streams, applying stopwords.
pub fn build_vocabulary(
    corpus: &[TokenStream],
    stopwords: &Stopwords,
    settings: VocabularySettings,
) -> Result<Vocabulary> {
    let docs: Vec<Vec<String>> = par::map(corpus, |t| stem_terms(t, stopwords));
    Vocabulary::from_documents(&docs, settings)
}

/// tf-idf vector of a term list: count times idf, then L2-normalized.
/// Unknown terms are ignored; a document with none yields the zero vector.
pub fn vectorize_tfidf<S: AsRef<str>>(terms: &[S], vocab: &Vocabulary) -> SparseVector {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for t in terms {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let (indices, values): (Vec<u32>, Vec<f64>) =
        counts.into_iter().map(|(i, c)| (i as u32, f64::from(c) * vocab.terms[i].idf)).unzip();
    SparseVector::new(indices, values, vocab.len()).expect("sorted in-range positive entries").l2_normalized()
}
