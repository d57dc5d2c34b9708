use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use super::Cui;
use crate::text::{stem_all, tokenize};
use crate::{Error, Result};

const STARTER: &str = include_str!("../../data/lexicon_starter.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptEntry {
    /// Phrase as a stem sequence.
    pub phrase: Vec<String>,
    pub cui: Cui,
    pub preferred_name: String,
}

/// Phrase dictionary. One phrase may carry several CUIs.
#[derive(Debug, Clone, Default)]
pub struct ConceptLexicon {
    entries: Vec<ConceptEntry>,
    by_phrase: HashMap<Vec<String>, Vec<Cui>>,
    max_phrase_length: usize,
}

impl ConceptLexicon {
    /// The bundled starter dictionary of common ICU concepts.
    pub fn starter() -> Self {
        load_lexicon(STARTER.as_bytes(), "starter lexicon").expect("bundled lexicon is valid")
    }

    pub fn entries(&self) -> &[ConceptEntry] {
        &self.entries
    }

    pub fn max_phrase_length(&self) -> usize {
        self.max_phrase_length
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cuis_for(&self, phrase: &[String]) -> Option<&[Cui]> {
        self.by_phrase.get(phrase).map(Vec::as_slice)
    }

    fn insert(&mut self, entry: ConceptEntry) {
        let cuis = self.by_phrase.entry(entry.phrase.clone()).or_default();
        if cuis.contains(&entry.cui) {
            return;
        }
        cuis.push(entry.cui.clone());
        self.max_phrase_length = self.max_phrase_length.max(entry.phrase.len());
        self.entries.push(entry);
    }
}

/// Reads `phrase<TAB>CUI<TAB>preferred name` lines. Blank lines and lines
/// starting with `#` are skipped. Phrases are tokenized and stemmed; repeated
/// `(phrase, CUI)` pairs are kept once.
pub fn load_lexicon<R: BufRead>(stream: R, source_name: &str) -> Result<ConceptLexicon> {
    let err =
        |line: usize, message: String| Error::Line { source_name: source_name.to_string(), line, message };
    let mut lexicon = ConceptLexicon::default();
    let mut seen_names: HashSet<(Vec<String>, Cui)> = HashSet::new();
    for (i, line) in stream.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(n, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let phrase = stem_all(&tokenize(fields[0]));
        if phrase.is_empty() {
            return Err(err(n, format!("phrase {:?} has no usable tokens", fields[0])));
        }
        let cui =
            Cui::parse(fields[1].trim()).ok_or_else(|| err(n, format!("malformed CUI {:?}", fields[1])))?;
        if !seen_names.insert((phrase.clone(), cui.clone())) {
            continue;
        }
        lexicon.insert(ConceptEntry { phrase, cui, preferred_name: fields[2].trim().to_string() });
    }
    Ok(lexicon)
}

/// Greedy left-to-right longest match over a stemmed document. Every CUI of
/// a matched phrase is emitted and scanning resumes after the match.
pub fn map_concepts(doc: &[String], lexicon: &ConceptLexicon) -> Vec<Cui> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < doc.len() {
        let longest = lexicon.max_phrase_length.min(doc.len() - i);
        let hit = (1..=longest).rev().find_map(|len| lexicon.cuis_for(&doc[i..i + len]).map(|c| (len, c)));
        match hit {
            Some((len, cuis)) => {
                out.extend(cuis.iter().cloned());
                i += len;
            }
            None => i += 1,
        }
    }
    out
}
