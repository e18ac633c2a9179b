use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;

use super::{CorpusError, Document, StageStats};
use crate::lang::Language;
use crate::tokenizer::{is_identifier_word, words, Vocabulary};

/// How document length is measured.
#[derive(Debug, Clone, Copy)]
pub enum TokenCount<'a> {
    /// Word tokens of the shared segmentation.
    Words,
    /// Subword tokens under a trained vocabulary.
    Bpe(&'a Vocabulary),
}

impl TokenCount<'_> {
    pub fn count(&self, text: &str) -> usize {
        match self {
            TokenCount::Words => words(text).len(),
            TokenCount::Bpe(v) => v.encode(text, Language::Cpp).tokens.len(),
        }
    }
}

/// True if `text` contains a keyword. Identifier-like keywords must match a
/// whole identifier; other keywords (operators) match as substrings.
pub fn contains_keyword(text: &str, keywords: &BTreeSet<String>, language: Language) -> bool {
    let ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    if text.split(|c: char| !ident(c)).any(|w| !w.is_empty() && keywords.contains(&language.keyword_key(w))) {
        return true;
    }
    keywords.iter().filter(|k| !is_identifier_word(k)).any(|k| text.contains(k.as_str()))
}

/// Keep documents that contain at least one keyword as a whole word.
pub fn filter_keywords(
    docs: Vec<Document>,
    language: Language,
    keywords: &BTreeSet<String>,
) -> Result<(Vec<Document>, StageStats), CorpusError> {
    if keywords.is_empty() {
        return Err(CorpusError::EmptyKeywords);
    }
    let keys: BTreeSet<String> = keywords.iter().map(|k| language.keyword_key(k)).collect();
    let keep: Vec<bool> = docs.par_iter().map(|d| contains_keyword(&d.text, &keys, language)).collect();
    Ok(StageStats::apply("keywords", docs, &keep))
}

/// Keep documents whose token count lies in `[min_tokens, max_tokens]`.
pub fn filter_length(
    docs: Vec<Document>,
    min_tokens: usize,
    max_tokens: usize,
    counter: TokenCount<'_>,
) -> Result<(Vec<Document>, StageStats), CorpusError> {
    if min_tokens == 0 || min_tokens >= max_tokens {
        return Err(CorpusError::InvalidBounds { min: min_tokens, max: max_tokens });
    }
    let keep: Vec<bool> = docs
        .par_iter()
        .map(|d| {
            let n = counter.count(&d.text);
            (min_tokens..=max_tokens).contains(&n)
        })
        .collect();
    Ok(StageStats::apply("length", docs, &keep))
}

/// Down-sample the larger corpus uniformly without replacement so both have
/// `min(|a|, |b|)` documents; retained documents keep their order.
pub fn balance<R: Rng + ?Sized>(
    a: Vec<Document>,
    b: Vec<Document>,
    rng: &mut R,
) -> Result<(Vec<Document>, Vec<Document>), CorpusError> {
    if a.is_empty() {
        return Err(CorpusError::EmptyCorpus("first"));
    }
    if b.is_empty() {
        return Err(CorpusError::EmptyCorpus("second"));
    }
    let n = a.len().min(b.len());
    let mut down = |docs: Vec<Document>| {
        if docs.len() == n {
            return docs;
        }
        let mut idx = rand::seq::index::sample(rng, docs.len(), n).into_vec();
        idx.sort_unstable();
        let mut slots: Vec<Option<Document>> = docs.into_iter().map(Some).collect();
        idx.into_iter().map(|i| slots[i].take().expect("indices are distinct")).collect()
    };
    let a = down(a);
    let b = down(b);
    Ok((a, b))
}
