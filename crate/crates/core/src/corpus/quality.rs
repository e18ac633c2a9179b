//! Educational-value labeling through an external judge, with a label cache.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Document, StageStats};

pub const QUALITY_PROMPT: &str = "Determine the educational value of the following code for a student whose goal is to learn C++ coding concepts. If it has educational value, return only \"Yes\", else, return \"No\".\nCode:{code}\nEducational value:";

pub fn quality_prompt(code: &str) -> String {
    QUALITY_PROMPT.replace("{code}", code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Llm,
    Classifier,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityLabel {
    pub doc_id: String,
    pub verdict: Verdict,
    pub source: LabelSource,
}

/// Map a judge response to a verdict: surrounding whitespace, quotes and a
/// trailing period are ignored, case is not significant.
pub fn normalize_verdict(raw: &str) -> Option<Verdict> {
    let t = raw.trim().trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '*')).trim();
    let t = t.strip_suffix('.').unwrap_or(t).trim();
    if t.eq_ignore_ascii_case("yes") {
        Some(Verdict::Yes)
    } else if t.eq_ignore_ascii_case("no") {
        Some(Verdict::No)
    } else {
        None
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum LabelerError {
    /// Worth retrying (timeouts, rate limits, server errors).
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

/// An external judge of educational value. Returns the raw response text.
pub trait Labeler: Send + Sync {
    fn source(&self) -> LabelSource;
    fn judge(&self, doc: &Document) -> Result<String, LabelerError>;
}

/// OpenAI-compatible chat-completions client.
#[derive(Debug, Clone)]
pub struct HttpLabeler {
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl HttpLabeler {
    pub const URL_VAR: &'static str = "FORGE_LABELER_URL";
    pub const MODEL_VAR: &'static str = "FORGE_LABELER_MODEL";
    pub const KEY_VAR: &'static str = "FORGE_LABELER_API_KEY";

    /// Configured from the environment; `None` when no endpoint is set.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var(Self::URL_VAR).ok().filter(|u| !u.is_empty())?;
        Some(Self {
            url,
            model: std::env::var(Self::MODEL_VAR).unwrap_or_else(|_| "gpt-4".into()),
            api_key: std::env::var(Self::KEY_VAR).ok().filter(|k| !k.is_empty()),
            timeout: Duration::from_secs(60),
        })
    }

    pub fn request_body(&self, doc: &Document) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": quality_prompt(&doc.text)}],
            "temperature": 0,
            "max_tokens": 4,
        })
    }
}

impl Labeler for HttpLabeler {
    fn source(&self) -> LabelSource {
        LabelSource::Llm
    }

    fn judge(&self, doc: &Document) -> Result<String, LabelerError> {
        let mut req = ureq::post(&self.url).timeout(self.timeout);
        if let Some(k) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {k}"));
        }
        let resp = match req.send_json(self.request_body(doc)) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let msg = format!("HTTP {code}: {}", r.into_string().unwrap_or_default());
                return Err(if code == 429 || code >= 500 { LabelerError::Transient(msg) } else { LabelerError::Fatal(msg) });
            }
            Err(e) => return Err(LabelerError::Transient(e.to_string())),
        };
        let v: serde_json::Value = resp.into_json().map_err(|e| LabelerError::Fatal(format!("bad response body: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| LabelerError::Fatal(format!("response has no choices[0].message.content: {v}")))
    }
}

/// Runs a local classifier once per document: code on stdin, verdict on stdout.
#[derive(Debug, Clone)]
pub struct CommandLabeler {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl Labeler for CommandLabeler {
    fn source(&self) -> LabelSource {
        LabelSource::Classifier
    }

    fn judge(&self, doc: &Document) -> Result<String, LabelerError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| LabelerError::Fatal(format!("{}: {e}", self.program.display())))?;
        let mut stdin = child.stdin.take().expect("stdin piped");
        let text = doc.text.clone();
        let writer = std::thread::spawn(move || stdin.write_all(text.as_bytes()));
        let out = child.wait_with_output().map_err(|e| LabelerError::Transient(e.to_string()))?;
        let _ = writer.join();
        if !out.status.success() {
            return Err(LabelerError::Transient(format!(
                "{} exited with {}: {}",
                self.program.display(),
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }
}

/// Labels keyed by document id, optionally backed by an append-only JSONL file.
#[derive(Debug, Default)]
pub struct LabelCache {
    path: Option<PathBuf>,
    labels: BTreeMap<String, QualityLabel>,
}

impl LabelCache {
    pub fn in_memory(labels: impl IntoIterator<Item = QualityLabel>) -> Self {
        Self { path: None, labels: labels.into_iter().map(|l| (l.doc_id.clone(), l)).collect() }
    }

    /// Open (or start) the cache file at `path`. Later lines override earlier ones.
    pub fn open(path: &Path) -> crate::Result<Self> {
        let mut labels = BTreeMap::new();
        if path.exists() {
            let f = std::fs::File::open(path).map_err(|e| crate::Error::io(path, e))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| crate::Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let l: QualityLabel = serde_json::from_str(&line)
                    .map_err(|e| CorpusError::Format { line: i + 1, reason: e.to_string() })?;
                labels.insert(l.doc_id.clone(), l);
            }
        }
        Ok(Self { path: Some(path.to_path_buf()), labels })
    }

    pub fn get(&self, doc_id: &str) -> Option<&QualityLabel> {
        self.labels.get(doc_id)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn insert(&mut self, label: QualityLabel) -> crate::Result<()> {
        if let Some(p) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(p).map_err(|e| crate::Error::io(p, e))?;
            let mut line = serde_json::to_vec(&label).expect("labels serialize");
            line.push(b'\n');
            f.write_all(&line).map_err(|e| crate::Error::io(p, e))?;
        }
        self.labels.insert(label.doc_id.clone(), label);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct QualityOptions {
    pub max_in_flight: usize,
    pub retries: u32,
    pub backoff: Duration,
}

impl Default for QualityOptions {
    fn default() -> Self {
        Self { max_in_flight: 4, retries: 3, backoff: Duration::from_millis(500) }
    }
}

#[derive(Debug)]
pub struct QualityOutcome {
    pub retained: Vec<Document>,
    /// One label per document that received a verdict, in corpus order.
    pub labels: Vec<QualityLabel>,
    /// Documents whose response was neither yes nor no, with the response.
    pub malformed: Vec<(String, String)>,
    /// Documents with no cached label while no labeler was available.
    pub unlabeled: Vec<String>,
    pub stats: StageStats,
}

fn judge_with_retry(l: &dyn Labeler, doc: &Document, opts: &QualityOptions) -> Result<String, LabelerError> {
    let mut attempt = 0;
    loop {
        match l.judge(doc) {
            Err(LabelerError::Transient(e)) if attempt < opts.retries => {
                tracing::debug!(doc = %doc.doc_id, attempt, "labeler: {e}; retrying");
                std::thread::sleep(opts.backoff * 2u32.pow(attempt));
                attempt += 1;
            }
            r => return r,
        }
    }
}

/// Keep documents judged educational.
///
/// Cached labels are used first; the rest go to `labeler` with at most
/// `max_in_flight` concurrent requests, and every new verdict is appended to
/// the cache as soon as it arrives. Without a labeler, uncached documents are
/// dropped and listed in `unlabeled`; with neither a labeler nor a cache the
/// call fails with `LabelerUnavailable`.
pub fn quality_filter(
    docs: Vec<Document>,
    labeler: Option<&dyn Labeler>,
    cache: Option<&mut LabelCache>,
    opts: &QualityOptions,
) -> crate::Result<QualityOutcome> {
    let mut scratch = LabelCache::default();
    let cache = match (cache, labeler) {
        (None, None) => return Err(CorpusError::LabelerUnavailable.into()),
        (Some(c), _) => c,
        (None, Some(_)) => &mut scratch,
    };

    let pending: Vec<usize> = (0..docs.len()).filter(|&i| cache.get(&docs[i].doc_id).is_none()).collect();
    let mut responses: BTreeMap<usize, String> = BTreeMap::new();
    if let (Some(l), false) = (labeler, pending.is_empty()) {
        let next = AtomicUsize::new(0);
        let shared = Mutex::new((&mut *cache, &mut responses, None::<crate::Error>));
        let workers = opts.max_in_flight.max(1).min(pending.len());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&i) = pending.get(k) else { break };
                    if shared.lock().expect("lock").2.is_some() {
                        break;
                    }
                    let doc = &docs[i];
                    let result = judge_with_retry(l, doc, opts);
                    let mut g = shared.lock().expect("lock");
                    match result {
                        Ok(raw) => match normalize_verdict(&raw) {
                            Some(verdict) => {
                                let label = QualityLabel { doc_id: doc.doc_id.clone(), verdict, source: l.source() };
                                if let Err(e) = g.0.insert(label) {
                                    g.2.get_or_insert(e);
                                }
                            }
                            None => {
                                g.1.insert(i, raw);
                            }
                        },
                        Err(e) => {
                            g.2.get_or_insert(
                                CorpusError::Labeler { doc_id: doc.doc_id.clone(), reason: e.to_string() }.into(),
                            );
                        }
                    }
                });
            }
        });
        if let Some(e) = shared.into_inner().expect("lock").2 {
            return Err(e);
        }
    }

    let mut stats = StageStats::new("quality");
    let (mut retained, mut labels, mut malformed, mut unlabeled) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, d) in docs.into_iter().enumerate() {
        let keep = match cache.get(&d.doc_id) {
            Some(l) => {
                labels.push(l.clone());
                l.verdict == Verdict::Yes
            }
            None => {
                match responses.remove(&i) {
                    Some(raw) => {
                        tracing::warn!(doc = %d.doc_id, response = %raw.trim(), "malformed verdict; dropping");
                        malformed.push((d.doc_id.clone(), raw));
                    }
                    None => unlabeled.push(d.doc_id.clone()),
                }
                false
            }
        };
        stats.record(d.language, keep);
        if keep {
            retained.push(d);
        }
    }
    Ok(QualityOutcome { retained, labels, malformed, unlabeled, stats })
}
