//! AST entity recognition labels.
//!
//! Each word of a source file is assigned the category of the deepest syntax
//! node that a mapping rule recognizes around it. The first subword token of
//! a word carries the category's begin id; later tokens carry `begin + 1`.

mod rules;
mod tagset;

pub use rules::{MappingRule, RuleSet};
pub use tagset::{AerTagSet, OUTSIDE};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::lang::Language;
use crate::syntax::{self, SyntaxError};
use crate::tokenizer::{word_ranges, TokenizedDocument, TokenizerError, Vocabulary};

#[derive(Debug, thiserror::Error)]
pub enum AerError {
    #[error("source could not be parsed ({error_fraction:.0$}% of bytes in error nodes)", 1)]
    ParseFailure { error_fraction: f64 },
    #[error("no grammar available for {0}")]
    GrammarMissing(Language),
    #[error("mapping rules, line {line}: {reason}")]
    Rules { line: usize, reason: String },
    #[error("tag set: {0}")]
    TagSet(String),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
}

impl From<SyntaxError> for AerError {
    fn from(e: SyntaxError) -> Self {
        match e {
            SyntaxError::GrammarMissing(l) => AerError::GrammarMissing(l),
            SyntaxError::NoTree => AerError::ParseFailure { error_fraction: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AerLabeledDocument {
    pub doc: TokenizedDocument,
    pub labels: Vec<u32>,
}

/// JSON-lines record: `{doc_id, language, tokens, labels}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AerRecord {
    pub doc_id: String,
    pub language: Language,
    pub tokens: Vec<u32>,
    pub labels: Vec<u32>,
}

impl From<&AerLabeledDocument> for AerRecord {
    fn from(d: &AerLabeledDocument) -> Self {
        AerRecord { doc_id: d.doc.doc_id.clone(), language: d.doc.language, tokens: d.doc.tokens.clone(), labels: d.labels.clone() }
    }
}

/// Category decision for one source word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLabel {
    /// Word byte range, leading whitespace included.
    pub range: Range<usize>,
    pub begin_id: u32,
    /// Byte range of the node that decided the category (empty for `O`).
    pub node: Range<usize>,
}

pub struct AerLabeler {
    language: Language,
    rules: RuleSet,
    tagset: AerTagSet,
    /// Sources with a larger share of bytes in error nodes are rejected.
    pub max_error_fraction: f64,
}

impl AerLabeler {
    pub fn new(language: Language, tagset: AerTagSet) -> Self {
        Self::with_rules(language, RuleSet::for_language(language), tagset)
    }

    pub fn with_rules(language: Language, rules: RuleSet, tagset: AerTagSet) -> Self {
        Self { language, rules, tagset, max_error_fraction: 0.5 }
    }

    pub fn tagset(&self) -> &AerTagSet {
        &self.tagset
    }

    /// Per-word category decisions for `source`.
    pub fn word_labels(&self, source: &str) -> Result<Vec<WordLabel>, AerError> {
        let ranges = word_ranges(source);
        if ranges.is_empty() {
            return Ok(Vec::new());
        }
        let tree = syntax::parse(source, self.language)?;
        let frac = syntax::error_fraction(&tree, source.len());
        if frac > self.max_error_fraction {
            return Err(AerError::ParseFailure { error_fraction: frac });
        }

        // Rules whose category is missing from the tag set never fire.
        let active: Vec<(&MappingRule, u32)> =
            self.rules.rules.iter().filter_map(|r| self.tagset.id_of(&r.category).map(|id| (r, id))).collect();

        // Pre-order painting: descendants overwrite ancestors.
        let mut paint: Vec<Option<(u32, usize, usize)>> = vec![None; source.len()];
        for node in syntax::preorder(tree.root_node()) {
            if node.start_byte() == node.end_byte() {
                continue;
            }
            if let Some(&(_, id)) = active.iter().find(|(r, _)| r.matches(node, source)) {
                for slot in &mut paint[node.byte_range()] {
                    *slot = Some((id, node.start_byte(), node.end_byte()));
                }
            }
        }

        Ok(ranges
            .into_iter()
            .map(|range| {
                let text = &source[range.clone()];
                let lead = text.len() - text.trim_start().len();
                let first = range.start + lead;
                match paint.get(first).copied().flatten() {
                    Some((id, s, e)) if first < range.end => WordLabel { range, begin_id: id, node: s..e },
                    _ => WordLabel { range, begin_id: OUTSIDE, node: 0..0 },
                }
            })
            .collect())
    }

    pub fn label(&self, source: &str, vocab: &Vocabulary) -> Result<AerLabeledDocument, AerError> {
        let words = self.word_labels(source)?;
        let doc = vocab.encode(source, self.language);
        debug_assert_eq!(words.len(), doc.word_spans.len());
        let mut labels = Vec::with_capacity(doc.tokens.len());
        for (w, &(s, e)) in words.iter().zip(&doc.word_spans) {
            for k in 0..(e - s) {
                labels.push(if w.begin_id == OUTSIDE || k == 0 { w.begin_id } else { w.begin_id + 1 });
            }
        }
        Ok(AerLabeledDocument { doc, labels })
    }
}

/// Label `source` with the shipped rules for `language`.
pub fn extract_labels(
    source: &str,
    language: Language,
    vocab: &Vocabulary,
    tagset: &AerTagSet,
) -> Result<AerLabeledDocument, AerError> {
    AerLabeler::new(language, tagset.clone()).label(source, vocab)
}
