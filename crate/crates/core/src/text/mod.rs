//! Bag-of-words featurization: tokenization, Porter stemming, stopword
//! removal, document-frequency filtering and tf-idf weighting.

pub mod porter;
mod stopwords;
mod tokenize;
mod vocab;

pub use porter::stem as porter_stem;
pub use stopwords::Stopwords;
pub use tokenize::{tokenize, TokenStream};
pub use vocab::{
    build_vocabulary, vectorize_tfidf, TermStats, Vocabulary, VocabularySettings, DEFAULT_MAX_DOC_FRACTION,
    DEFAULT_MIN_DOC_COUNT,
};

/// Stems a token stream, dropping stopwords. A token is dropped when either
/// the raw token or its stem is in the list.
pub fn stem_terms(tokens: &TokenStream, stopwords: &Stopwords) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stopwords.contains(t))
        .map(|t| porter_stem(t))
        .filter(|s| !stopwords.contains(s))
        .collect()
}

/// Stems every token, keeping stopwords. Used for concept matching, where
/// phrases like "shortness of breath" need their function words.
pub fn stem_all(tokens: &TokenStream) -> Vec<String> {
    tokens.iter().map(|t| porter_stem(t)).collect()
}

/// Text to filtered stems in one call.
pub fn analyze(text: &str, stopwords: &Stopwords) -> Vec<String> {
    stem_terms(&tokenize(text), stopwords)
}
