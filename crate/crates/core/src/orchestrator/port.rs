use std::collections::BTreeMap;

use crate::example::{Objective, TrainingExample};
use crate::lang::Language;
use crate::tokenizer::{word_ranges, Vocabulary};

#[derive(Debug, Clone, thiserror::Error)]
pub enum TranslatorError {
    /// The translator rejected one request; the caller may skip that document.
    #[error("translator error: {0}")]
    Rejected(String),
    #[error("translator does not support {src} -> {tgt}")]
    Unsupported { src: Language, tgt: Language },
    #[error("translator protocol: {0}")]
    Protocol(String),
    #[error("translator process: {0}")]
    Process(String),
}

impl TranslatorError {
    /// Errors confined to a single request.
    pub fn is_per_document(&self) -> bool {
        matches!(self, TranslatorError::Rejected(_) | TranslatorError::Unsupported { .. })
    }
}

/// The model, seen from the pipeline.
pub trait TranslatorPort {
    /// Translate a token sequence (no language token) from `src` to `tgt`.
    fn translate(&self, tokens: &[u32], src: Language, tgt: Language, beam_size: usize) -> Result<Vec<u32>, TranslatorError>;

    /// One optimization step on a single-objective batch; returns the loss.
    fn train_step(&mut self, batch: &[TrainingExample]) -> Result<f64, TranslatorError>;

    /// Copy encoder weights into the decoder before denoising starts.
    fn init_decoder_from_encoder(&mut self) -> Result<(), TranslatorError>;
}

/// What a stub saw in one `train_step` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub objectives: Vec<Objective>,
    pub directions: Vec<(Language, Language)>,
    pub targets: Vec<Vec<u32>>,
}

impl StepRecord {
    fn of(batch: &[TrainingExample]) -> Self {
        Self {
            objectives: batch.iter().map(|e| e.objective).collect(),
            directions: batch.iter().map(|e| (e.src_lang, e.tgt_lang)).collect(),
            targets: batch.iter().map(|e| e.target.clone()).collect(),
        }
    }
}

fn stub_loss(step: usize) -> f64 {
    1.0 / (1.0 + step as f64)
}

/// Returns its input unchanged.
#[derive(Debug, Default)]
pub struct StubIdentity {
    pub steps: Vec<StepRecord>,
    pub decoder_initialized: bool,
}

impl TranslatorPort for StubIdentity {
    fn translate(&self, tokens: &[u32], _: Language, _: Language, _: usize) -> Result<Vec<u32>, TranslatorError> {
        Ok(tokens.to_vec())
    }

    fn train_step(&mut self, batch: &[TrainingExample]) -> Result<f64, TranslatorError> {
        self.steps.push(StepRecord::of(batch));
        Ok(stub_loss(self.steps.len()))
    }

    fn init_decoder_from_encoder(&mut self) -> Result<(), TranslatorError> {
        self.decoder_initialized = true;
        Ok(())
    }
}

/// Word-for-word substitution from a table per direction; unmapped words pass through.
#[derive(Debug)]
pub struct StubDictionary {
    vocab: Vocabulary,
    table: BTreeMap<(Language, Language), BTreeMap<String, String>>,
    pub steps: Vec<StepRecord>,
    pub decoder_initialized: bool,
}

impl StubDictionary {
    pub fn new(vocab: Vocabulary) -> Self {
        Self { vocab, table: BTreeMap::new(), steps: Vec::new(), decoder_initialized: false }
    }

    /// Add `word -> translation` for `src -> tgt`; a key may be mapped only once.
    pub fn insert(&mut self, src: Language, tgt: Language, word: &str, translation: &str) -> Result<(), String> {
        let m = self.table.entry((src, tgt)).or_default();
        if m.contains_key(word) {
            return Err(format!("{src} -> {tgt}: `{word}` mapped twice"));
        }
        m.insert(word.to_string(), translation.to_string());
        Ok(())
    }

    /// Lines of `src tgt word translation`; `#` starts a comment.
    pub fn from_text(text: &str, vocab: Vocabulary) -> Result<Self, String> {
        let mut d = Self::new(vocab);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let [src, tgt, word, tr] = f[..] else {
                return Err(format!("line {}: expected `src tgt word translation`", i + 1));
            };
            let src: Language = src.parse().map_err(|e| format!("line {}: {e}", i + 1))?;
            let tgt: Language = tgt.parse().map_err(|e| format!("line {}: {e}", i + 1))?;
            d.insert(src, tgt, word, tr).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(d)
    }

    pub fn map_text(&self, text: &str, src: Language, tgt: Language) -> String {
        let Some(m) = self.table.get(&(src, tgt)) else { return text.to_string() };
        let mut out = String::with_capacity(text.len());
        for r in word_ranges(text) {
            let w = &text[r];
            let core = w.trim_start();
            out.push_str(&w[..w.len() - core.len()]);
            out.push_str(m.get(core).map_or(core, String::as_str));
        }
        out
    }
}

impl TranslatorPort for StubDictionary {
    fn translate(&self, tokens: &[u32], src: Language, tgt: Language, _: usize) -> Result<Vec<u32>, TranslatorError> {
        let text = self.vocab.decode(tokens).map_err(|e| TranslatorError::Rejected(e.to_string()))?;
        Ok(self.vocab.encode(&self.map_text(&text, src, tgt), tgt).tokens)
    }

    fn train_step(&mut self, batch: &[TrainingExample]) -> Result<f64, TranslatorError> {
        self.steps.push(StepRecord::of(batch));
        Ok(stub_loss(self.steps.len()))
    }

    fn init_decoder_from_encoder(&mut self) -> Result<(), TranslatorError> {
        self.decoder_initialized = true;
        Ok(())
    }
}
