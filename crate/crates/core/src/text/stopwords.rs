use std::collections::HashSet;
use std::path::Path;

use crate::{Error, Result};

const PUBMED: &str = include_str!("../../data/stopwords_pubmed.txt");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled PubMed list.
    pub fn pubmed() -> Self {
        Self::parse(PUBMED)
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// One token per line; `#` starts a comment; blank lines ignored.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_ascii_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Stopwords(words.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list() {
        let sw = Stopwords::pubmed();
        assert_eq!(sw.len(), 133);
        assert!(sw.contains("the") && sw.contains("pmid"));
        assert!(!sw.contains("patient"));
    }

    #[test]
    fn comments_and_case() {
        let sw = Stopwords::parse("# header\nThe\n\n of  # trailing\n");
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("the") && sw.contains("of"));
    }
}
