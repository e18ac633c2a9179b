//! Per-language keyword sets and word-frequency tables.
//!
//! Frequencies are counted over surface words (the decoded text of each word
//! span, whitespace stripped), not over subword tokens.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::lang::Language;
use crate::tokenizer::{TokenizedDocument, TokenizerError, Vocabulary};

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("document {doc_id} is {found}, expected {expected}")]
    LanguageMismatch { doc_id: String, expected: Language, found: Language },
    #[error("cannot merge a {0} profile into a {1} profile")]
    MergeMismatch(Language, Language),
    #[error("malformed profile, line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    pub language: Language,
    pub keywords: BTreeSet<String>,
    pub freq: BTreeMap<String, u64>,
    pub total: u64,
}

impl LanguageProfile {
    pub fn empty(language: Language, keywords: BTreeSet<String>) -> Self {
        Self { language, keywords, freq: BTreeMap::new(), total: 0 }
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.keywords.contains(&self.language.keyword_key(word))
    }

    pub fn add_word(&mut self, word: &str) {
        *self.freq.entry(word.to_string()).or_default() += 1;
        self.total += 1;
    }

    /// Count additivity: merging equals profiling the concatenated corpora.
    pub fn merge(&mut self, other: &LanguageProfile) -> Result<(), ProfileError> {
        if other.language != self.language {
            return Err(ProfileError::MergeMismatch(other.language, self.language));
        }
        self.keywords.extend(other.keywords.iter().cloned());
        for (w, c) in &other.freq {
            *self.freq.entry(w.clone()).or_default() += c;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn probability(&self, word: &str) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.freq.get(word).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Sampler over `freq^smoothing`, restricted to words not in `exclude`.
    /// Returns `None` when nothing is left to sample.
    pub fn sampler(&self, smoothing: f64, exclude: Option<&LanguageProfile>) -> Option<WordSampler> {
        let (words, weights): (Vec<String>, Vec<f64>) = self
            .freq
            .iter()
            .filter(|(w, _)| exclude.is_none_or(|ex| !ex.freq.contains_key(*w)))
            .map(|(w, &c)| (w.clone(), (c as f64).powf(smoothing)))
            .unzip();
        let dist = WeightedIndex::new(&weights).ok()?;
        Some(WordSampler { words, dist })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("language {}\n", self.language);
        for k in &self.keywords {
            out.push_str(&format!("keyword {k}\n"));
        }
        for (w, c) in &self.freq {
            out.push_str(&format!("freq {w} {c}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProfileError> {
        let err = |line: usize, reason: &str| ProfileError::Format { line, reason: reason.into() };
        let mut language = None;
        let mut keywords = BTreeSet::new();
        let mut freq = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split(' ').collect();
            match fields.as_slice() {
                [""] => {}
                ["language", l] => language = Some(l.parse::<Language>().map_err(|e| err(line_no, &e.to_string()))?),
                ["keyword", k] => {
                    keywords.insert(k.to_string());
                }
                ["freq", w, c] => {
                    let c: u64 = c.parse().map_err(|_| err(line_no, "count is not an integer"))?;
                    if c == 0 {
                        return Err(err(line_no, "counts must be >= 1"));
                    }
                    freq.insert(w.to_string(), c);
                }
                _ => return Err(err(line_no, "unrecognized record")),
            }
        }
        let language = language.ok_or_else(|| err(0, "missing `language` record"))?;
        let total = freq.values().sum();
        Ok(Self { language, keywords, freq, total })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(Self::from_text(&text)?)
    }
}

pub struct WordSampler {
    words: Vec<String>,
    dist: WeightedIndex<f64>,
}

impl WordSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        &self.words[self.dist.sample(rng)]
    }

    pub fn support(&self) -> &[String] {
        &self.words
    }
}

/// Surface words of one document, in order, whitespace-only words skipped.
pub fn surface_words(doc: &TokenizedDocument, vocab: &Vocabulary) -> Result<Vec<String>, TokenizerError> {
    let mut out = Vec::with_capacity(doc.word_spans.len());
    for w in 0..doc.word_count() {
        let text = vocab.decode(doc.word_tokens(w))?;
        let t = text.trim();
        if !t.is_empty() {
            out.push(t.to_string());
        }
    }
    Ok(out)
}

pub fn build_profile(
    corpus: &[TokenizedDocument],
    language: Language,
    keywords: &BTreeSet<String>,
    vocab: &Vocabulary,
) -> Result<LanguageProfile, ProfileError> {
    let keys = keywords.iter().map(|k| language.keyword_key(k)).collect();
    let mut profile = LanguageProfile::empty(language, keys);
    for doc in corpus {
        if doc.language != language {
            return Err(ProfileError::LanguageMismatch { doc_id: doc.doc_id.clone(), expected: language, found: doc.language });
        }
        for w in surface_words(doc, vocab)? {
            profile.add_word(&w);
        }
    }
    Ok(profile)
}

/// Profiles keyed by language, as loaded from a directory of `<lang>.profile` files.
pub type ProfileSet = BTreeMap<Language, LanguageProfile>;

pub fn load_profile_dir(dir: &Path) -> Result<ProfileSet, crate::Error> {
    let mut set = ProfileSet::new();
    for lang in Language::ALL {
        let path = dir.join(format!("{lang}.profile"));
        if path.exists() {
            let p = LanguageProfile::load(&path)?;
            set.insert(p.language, p);
        }
    }
    Ok(set)
}
