//! Byte-level BPE tokenizer that keeps track of whole-word boundaries.

mod bpe;
mod segment;
mod vocab;

pub use bpe::train_bpe;
pub use segment::{is_identifier_word, word_ranges, words};
pub use vocab::{SpecialRole, Vocabulary};

use serde::{Deserialize, Serialize};

use crate::lang::Language;

pub const DEFAULT_VOCAB_SIZE: usize = 32_000;

/// Number of base byte tokens.
pub const BYTE_ALPHABET: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum TokenizerError {
    #[error("cannot train a tokenizer on an empty corpus")]
    EmptyCorpus,
    #[error("vocab size {requested} is below the minimum of {minimum} (256 bytes + special tokens)")]
    VocabTooSmall { requested: usize, minimum: usize },
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("byte sequence {0:?} is not in the vocabulary")]
    UnknownCharacter(String),
    #[error("special token {0} is not configured in this vocabulary")]
    MissingSpecial(String),
    #[error("malformed vocabulary file, line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// Token ids plus the word partition they were produced from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub doc_id: String,
    pub language: Language,
    pub tokens: Vec<u32>,
    /// Half-open `(start, end)` token index pairs, one per word.
    pub word_spans: Vec<(usize, usize)>,
}

impl TokenizedDocument {
    pub fn with_id(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = doc_id.into();
        self
    }

    pub fn word_count(&self) -> usize {
        self.word_spans.len()
    }

    pub fn word_tokens(&self, word: usize) -> &[u32] {
        let (s, e) = self.word_spans[word];
        &self.tokens[s..e]
    }

    /// True when the spans are sorted, non-empty, contiguous and cover every token.
    pub fn spans_partition_tokens(&self) -> bool {
        let mut next = 0;
        for &(s, e) in &self.word_spans {
            if s != next || e <= s {
                return false;
            }
            next = e;
        }
        next == self.tokens.len()
    }
}
