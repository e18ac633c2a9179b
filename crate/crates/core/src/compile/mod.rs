//! Compiling generated sources, classifying failures and applying rule-based fixes.

mod accuracy;
mod adapter;
mod classify;
mod repair;

pub use accuracy::{compilation_accuracy, AccuracyReport, DocOutcome};
pub use adapter::{strip_launch_config, CompilerAdapter};
pub use classify::{classify_error, undefined_identifiers};
pub use repair::{close_delimiters, repair, unclosed_delimiters, Repair};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::Language;

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("compiler not found: {0}")]
    CompilerMissing(String),
    #[error("compiler timed out after {secs} s")]
    Timeout { secs: u64 },
    #[error("source compiled without errors")]
    NotAnError,
    #[error("{0} errors are not repaired automatically")]
    Unrepairable(ErrorCategory),
    #[error("compiler adapter: {0}")]
    Adapter(String),
    #[error(transparent)]
    Io(std::io::Error),
}

impl CompileError {
    pub fn is_external(&self) -> bool {
        matches!(self, CompileError::CompilerMissing(_) | CompileError::Timeout { .. } | CompileError::Io(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl Severity {
    pub fn parse(s: &str) -> Self {
        let s = s.to_ascii_lowercase();
        if s.contains("error") {
            Severity::Error
        } else if s.contains("warning") {
            Severity::Warning
        } else {
            Severity::Note
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line in the submitted source; 0 when outside it.
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileResult {
    pub doc_id: String,
    pub status: CompileStatus,
    pub diagnostics: Vec<Diagnostic>,
    pub compiler: String,
    pub language: Language,
    pub elapsed_ms: u64,
}

impl CompileResult {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorCategory {
    #[serde(rename = "undefined_generic_T")]
    UndefinedGenericT,
    #[serde(rename = "missing_variable_init")]
    MissingVariableInit,
    #[serde(rename = "missing_braces")]
    MissingBraces,
    #[serde(rename = "wrong_function_call")]
    WrongFunctionCall,
    #[serde(rename = "nontrivial")]
    Nontrivial,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 5] = [
        ErrorCategory::UndefinedGenericT,
        ErrorCategory::MissingVariableInit,
        ErrorCategory::MissingBraces,
        ErrorCategory::WrongFunctionCall,
        ErrorCategory::Nontrivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::UndefinedGenericT => "undefined_generic_T",
            ErrorCategory::MissingVariableInit => "missing_variable_init",
            ErrorCategory::MissingBraces => "missing_braces",
            ErrorCategory::WrongFunctionCall => "wrong_function_call",
            ErrorCategory::Nontrivial => "nontrivial",
        }
    }

    pub fn is_repairable(self) -> bool {
        matches!(self, ErrorCategory::UndefinedGenericT | ErrorCategory::MissingVariableInit | ErrorCategory::MissingBraces)
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub doc_id: String,
    pub category: ErrorCategory,
    /// Rule ids in the order they changed the source.
    pub fixes_applied: Vec<String>,
    pub fixed_source: String,
    pub post_status: CompileStatus,
}
