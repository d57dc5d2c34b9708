use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// Ordered lowercase tokens; none empty, none containing whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TokenStream {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenStream {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenStream(
            iter.into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty() && !t.contains(char::is_whitespace))
                .collect(),
        )
    }
}

/// Splits on anything that is not an ASCII letter or digit, lowercases, and
/// keeps only fragments made entirely of letters with length >= 2.
pub fn tokenize(text: &str) -> TokenStream {
    TokenStream(
        text.split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|frag| frag.len() >= 2 && frag.bytes().all(|b| b.is_ascii_alphabetic()))
            .map(|frag| frag.to_ascii_lowercase())
            .collect(),
    )
}
