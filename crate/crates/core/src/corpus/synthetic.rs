use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::filters::contains_keyword;
use crate::lang::Language;

/// Share of non-empty lines without code punctuation above which a candidate is prose.
pub const NATURAL_TEXT_THRESHOLD: f64 = 0.4;

const CODE_PUNCTUATION: &[char] = &[';', '{', '}', '(', ')', '[', ']', '=', '<', '>', '#', '&', '|', '*'];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticStats {
    pub input: usize,
    pub empty: usize,
    pub no_keyword: usize,
    pub natural_text: usize,
    pub retained: usize,
}

/// True if more than `threshold` of the non-empty lines look like prose: no
/// code punctuation and not starting with a keyword of `language`.
pub fn is_natural_text(text: &str, language: Language, threshold: f64) -> bool {
    let keywords = language.default_keywords();
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.is_empty() {
        return false;
    }
    let prose = lines
        .iter()
        .filter(|l| {
            let first = l.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).next().unwrap_or("");
            !l.contains(CODE_PUNCTUATION) && !keywords.contains(&language.keyword_key(first))
        })
        .count();
    prose as f64 / lines.len() as f64 > threshold
}

/// Drop synthetic `(source, candidate)` pairs whose candidate is empty, has no
/// target-language keyword, or reads as natural text.
pub fn filter_synthetic_pairs(
    pairs: Vec<(String, String)>,
    target: Language,
    target_keywords: &BTreeSet<String>,
    natural_threshold: f64,
) -> (Vec<(String, String)>, SyntheticStats) {
    let mut stats = SyntheticStats { input: pairs.len(), ..Default::default() };
    let keys: BTreeSet<String> = target_keywords.iter().map(|k| target.keyword_key(k)).collect();
    let mut out = Vec::new();
    for (src, cand) in pairs {
        if cand.trim().is_empty() {
            stats.empty += 1;
        } else if !contains_keyword(&cand, &keys, target) {
            stats.no_keyword += 1;
        } else if is_natural_text(&cand, target, natural_threshold) {
            stats.natural_text += 1;
        } else {
            stats.retained += 1;
            out.push((src, cand));
        }
    }
    (out, stats)
}
