//! Corpus loading, filtering and balancing.

mod filters;
mod quality;
mod synthetic;

pub use filters::{balance, contains_keyword, filter_keywords, filter_length, TokenCount};
pub use quality::{
    normalize_verdict, quality_filter, quality_prompt, CommandLabeler, HttpLabeler, LabelCache, LabelSource, Labeler,
    LabelerError, QualityLabel, QualityOptions, QualityOutcome, Verdict, QUALITY_PROMPT,
};
pub use synthetic::{filter_synthetic_pairs, is_natural_text, SyntheticStats, NATURAL_TEXT_THRESHOLD};

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lang::Language;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("keyword set is empty")]
    EmptyKeywords,
    #[error("invalid length bounds [{min}, {max}]")]
    InvalidBounds { min: usize, max: usize },
    #[error("{0} corpus is empty")]
    EmptyCorpus(&'static str),
    #[error("no label cache and no labeler endpoint configured")]
    LabelerUnavailable,
    #[error("labeler failed on {doc_id}: {reason}")]
    Labeler { doc_id: String, reason: String },
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

impl CorpusError {
    pub fn is_external(&self) -> bool {
        matches!(self, CorpusError::LabelerUnavailable | CorpusError::Labeler { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    #[serde(alias = "id")]
    pub doc_id: String,
    pub language: Language,
    pub text: String,
}

/// Read `{doc_id, language, text}` JSON lines.
pub fn read_jsonl(path: &Path) -> crate::Result<Vec<Document>> {
    let f = std::fs::File::open(path).map_err(|e| crate::Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| crate::Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let d = serde_json::from_str(&line).map_err(|e| CorpusError::Format { line: i + 1, reason: e.to_string() })?;
        docs.push(d);
    }
    Ok(docs)
}

pub fn write_jsonl(docs: &[Document], path: &Path) -> crate::Result<()> {
    let mut out = Vec::new();
    for d in docs {
        serde_json::to_writer(&mut out, d).expect("documents serialize");
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| crate::Error::io(path, e))
}

/// Load every source file under `dir` whose extension names a language.
///
/// Document ids are `/`-separated paths relative to `dir`. Files that are not
/// UTF-8 are skipped with a warning.
pub fn read_dir(dir: &Path, only: Option<Language>) -> crate::Result<Vec<Document>> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| crate::Error::io(&d, e))?;
        for e in entries {
            let p = e.map_err(|e| crate::Error::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    files.sort();
    let mut docs = Vec::new();
    for p in files {
        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let Some(lang) = Language::ALL.into_iter().find(|l| l.file_extensions().contains(&ext.as_str())) else {
            continue;
        };
        if only.is_some_and(|o| o != lang) {
            continue;
        }
        let bytes = std::fs::read(&p).map_err(|e| crate::Error::io(&p, e))?;
        let Ok(text) = String::from_utf8(bytes) else {
            tracing::warn!(path = %p.display(), "skipping non-UTF-8 file");
            continue;
        };
        let rel = p.strip_prefix(dir).unwrap_or(&p);
        let doc_id = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        docs.push(Document { doc_id, language: lang, text });
    }
    Ok(docs)
}

/// A directory tree or a JSONL file.
pub fn load_corpus(path: &Path, only: Option<Language>) -> crate::Result<Vec<Document>> {
    if path.is_dir() {
        read_dir(path, only)
    } else {
        let mut docs = read_jsonl(path)?;
        if let Some(o) = only {
            docs.retain(|d| d.language == o);
        }
        Ok(docs)
    }
}

/// SHA-256 over the canonical JSONL serialization.
pub fn digest_documents(docs: &[Document]) -> String {
    let mut h = Sha256::new();
    for d in docs {
        h.update(serde_json::to_vec(d).expect("documents serialize"));
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub input: usize,
    pub retained: usize,
    pub dropped: usize,
}

impl Counts {
    fn record(&mut self, keep: bool) {
        self.input += 1;
        if keep {
            self.retained += 1;
        } else {
            self.dropped += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: String,
    pub total: Counts,
    pub per_language: BTreeMap<Language, Counts>,
}

impl StageStats {
    pub fn new(stage: &str) -> Self {
        Self { stage: stage.to_string(), total: Counts::default(), per_language: BTreeMap::new() }
    }

    pub fn record(&mut self, language: Language, keep: bool) {
        self.total.record(keep);
        self.per_language.entry(language).or_default().record(keep);
    }

    /// Apply per-document decisions, keeping input order.
    pub(crate) fn apply(stage: &str, docs: Vec<Document>, keep: &[bool]) -> (Vec<Document>, StageStats) {
        let mut stats = StageStats::new(stage);
        let mut out = Vec::new();
        for (d, &k) in docs.into_iter().zip(keep) {
            stats.record(d.language, k);
            if k {
                out.push(d);
            }
        }
        (out, stats)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSummary {
    pub files: usize,
    pub tokens: usize,
    /// Token-count histogram keyed by bucket lower bound (0, 1, 2, 4, 8, ...).
    pub histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub stages: Vec<StageStats>,
    pub languages: BTreeMap<Language, LanguageSummary>,
}

pub(crate) fn bucket(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

impl CorpusStats {
    pub fn summarize(docs: &[Document], counter: TokenCount<'_>) -> BTreeMap<Language, LanguageSummary> {
        let mut out: BTreeMap<Language, LanguageSummary> = BTreeMap::new();
        for d in docs {
            let n = counter.count(&d.text);
            let s = out.entry(d.language).or_default();
            s.files += 1;
            s.tokens += n;
            *s.histogram.entry(bucket(n)).or_insert(0) += 1;
        }
        out
    }

    pub fn describe(docs: &[Document], counter: TokenCount<'_>) -> Self {
        Self { stages: Vec::new(), languages: Self::summarize(docs, counter) }
    }

    pub fn push(&mut self, stage: StageStats) {
        self.stages.push(stage);
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)
    }
}
