//! Word segmentation shared by the tokenizer, the profiles and the metrics.
//!
//! A word is a maximal run of identifier characters `[A-Za-z0-9_]` or a single
//! other non-whitespace character. Whitespace preceding a word is attached to
//! it; whitespace at the very end of the text forms a word of its own. The
//! resulting byte ranges partition the input.

use std::ops::Range;

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Byte ranges of the words of `text`, whitespace prefixes included.
pub fn word_ranges(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut start = 0usize;
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut end = i + c.len_utf8();
        chars.next();
        if is_ident(c) {
            while let Some(&(j, d)) = chars.peek() {
                if !is_ident(d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
        }
        out.push(start..end);
        start = end;
    }
    if start < text.len() {
        out.push(start..text.len());
    }
    out
}

/// Words without their whitespace; whitespace-only words are skipped.
pub fn words(text: &str) -> Vec<&str> {
    word_ranges(text)
        .into_iter()
        .map(|r| text[r].trim_start())
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn is_identifier_word(word: &str) -> bool {
    !word.is_empty() && word.chars().all(is_ident)
}
