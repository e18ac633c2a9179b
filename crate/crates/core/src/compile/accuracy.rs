use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_error, repair, CompileError, CompileStatus, CompilerAdapter, ErrorCategory, RepairOutcome};

/// Maximum number of repair-and-recompile rounds per document.
pub const MAX_REPAIR_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocOutcome {
    pub doc_id: String,
    /// Status of the source as given.
    pub initial_status: CompileStatus,
    /// Status after repair (equal to `initial_status` without repair).
    pub final_status: CompileStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<ErrorCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<RepairOutcome>,
    /// Compiler failure (missing, timeout) that prevented a verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub compiler: String,
    pub with_repair: bool,
    pub total: usize,
    pub compiled: usize,
    /// Percentage of documents compiling, after repair when enabled.
    pub accuracy: f64,
    pub compiled_before_repair: usize,
    /// Initial category of every failing document.
    pub histogram: BTreeMap<ErrorCategory, usize>,
    pub documents: Vec<DocOutcome>,
}

impl AccuracyReport {
    pub fn tool_errors(&self) -> usize {
        self.documents.iter().filter(|d| d.tool_error.is_some()).count()
    }
}

fn evaluate(adapter: &CompilerAdapter, doc_id: &str, source: &str, with_repair: bool) -> Result<DocOutcome, CompileError> {
    let first = adapter.compile(doc_id, source)?;
    let mut out = DocOutcome {
        doc_id: doc_id.to_string(),
        initial_status: first.status,
        final_status: first.status,
        category: None,
        repair: None,
        tool_error: None,
    };
    if first.status == CompileStatus::Ok {
        return Ok(out);
    }
    let category = classify_error(&first, source, adapter.language)?;
    out.category = Some(category);
    if !with_repair || !category.is_repairable() {
        return Ok(out);
    }

    let mut current = source.to_string();
    let mut cat = category;
    let mut fixes = Vec::new();
    let mut status = first.status;
    for _ in 0..MAX_REPAIR_ROUNDS {
        let Ok(r) = repair(&current, cat, adapter.language) else { break };
        let Some(rule) = r.rule else { break };
        fixes.push(rule.to_string());
        current = r.source;
        let res = adapter.compile(doc_id, &current)?;
        status = res.status;
        if status == CompileStatus::Ok {
            break;
        }
        cat = classify_error(&res, &current, adapter.language)?;
        if !cat.is_repairable() {
            break;
        }
    }
    out.final_status = status;
    out.repair = Some(RepairOutcome {
        doc_id: doc_id.to_string(),
        category,
        fixes_applied: fixes,
        fixed_source: current,
        post_status: status,
    });
    Ok(out)
}

/// Compile every `(doc_id, source)` with at most `jobs` compilations in flight.
///
/// Per-document compiler failures are recorded in the outcome and count as
/// not compiled; they never abort the run.
pub fn compilation_accuracy(
    sources: &[(String, String)],
    adapter: &CompilerAdapter,
    with_repair: bool,
    jobs: usize,
) -> Result<AccuracyReport, CompileError> {
    adapter.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CompileError::Adapter(e.to_string()))?;
    let documents: Vec<DocOutcome> = pool.install(|| {
        sources
            .par_iter()
            .map(|(id, src)| {
                evaluate(adapter, id, src, with_repair).unwrap_or_else(|e| {
                    tracing::warn!(doc = %id, "compile failed: {e}");
                    DocOutcome {
                        doc_id: id.clone(),
                        initial_status: CompileStatus::Error,
                        final_status: CompileStatus::Error,
                        category: None,
                        repair: None,
                        tool_error: Some(e.to_string()),
                    }
                })
            })
            .collect()
    });
    let total = documents.len();
    let compiled = documents.iter().filter(|d| d.final_status == CompileStatus::Ok).count();
    let compiled_before_repair = documents.iter().filter(|d| d.initial_status == CompileStatus::Ok).count();
    let mut histogram = BTreeMap::new();
    for c in documents.iter().filter_map(|d| d.category) {
        *histogram.entry(c).or_insert(0) += 1;
    }
    Ok(AccuracyReport {
        compiler: adapter.name.clone(),
        with_repair,
        total,
        compiled,
        accuracy: if total == 0 { 100.0 } else { 100.0 * compiled as f64 / total as f64 },
        compiled_before_repair,
        histogram,
        documents,
    })
}
