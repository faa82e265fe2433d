//! Token-length proxies.
//!
//! Scores and cache replay only need a deterministic mapping from text to a
//! token sequence. The built-ins count characters, whitespace-separated words
//! or whole field fragments; anything else can be plugged in through
//! [`Tokenizer`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub trait Tokenizer: Send + Sync {
    /// Splits `text` into tokens. Every token is a non-empty slice of `text`.
    fn tokens<'a>(&self, text: &'a str) -> Vec<&'a str>;

    fn count(&self, text: &str) -> usize {
        self.tokens(text).len()
    }
}

/// One token per Unicode scalar value.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharTokenizer;

impl Tokenizer for CharTokenizer {
    fn tokens<'a>(&self, text: &'a str) -> Vec<&'a str> {
        text.char_indices()
            .map(|(i, c)| &text[i..i + c.len_utf8()])
            .collect()
    }

    fn count(&self, text: &str) -> usize {
        text.chars().count()
    }
}

/// One token per maximal run of non-whitespace characters.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordTokenizer;

impl Tokenizer for WordTokenizer {
    fn tokens<'a>(&self, text: &'a str) -> Vec<&'a str> {
        text.split_whitespace().collect()
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

/// One token per `, `-terminated piece, so every rendered field fragment is a
/// single token. Useful for reasoning in unit fragment lengths.
#[derive(Debug, Clone, Copy, Default)]
pub struct FragmentTokenizer;

impl Tokenizer for FragmentTokenizer {
    fn tokens<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut rest = text;
        while let Some(i) = rest.find(", ") {
            out.push(&rest[..i + 2]);
            rest = &rest[i + 2..];
        }
        if !rest.is_empty() {
            out.push(rest);
        }
        out
    }
}

/// Serializable selector for the built-in tokenizers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerKind {
    #[default]
    Char,
    Word,
    Fragment,
}

impl TokenizerKind {
    pub fn build(self) -> Arc<dyn Tokenizer> {
        match self {
            TokenizerKind::Char => Arc::new(CharTokenizer),
            TokenizerKind::Word => Arc::new(WordTokenizer),
            TokenizerKind::Fragment => Arc::new(FragmentTokenizer),
        }
    }
}

impl fmt::Display for TokenizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizerKind::Char => f.write_str("char"),
            TokenizerKind::Word => f.write_str("word"),
            TokenizerKind::Fragment => f.write_str("fragment"),
        }
    }
}

impl std::str::FromStr for TokenizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(TokenizerKind::Char),
            "word" => Ok(TokenizerKind::Word),
            "fragment" => Ok(TokenizerKind::Fragment),
            other => Err(format!("unknown tokenizer `{other}` (expected char, word or fragment)")),
        }
    }
}
