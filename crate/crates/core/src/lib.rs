//! Data preparation, corruption, evaluation and repair machinery for
//! unsupervised C++ / CUDA / Fortran code translation.
//!
//! The neural model is kept behind [`orchestrator::TranslatorPort`]; everything
//! else here is deterministic given a seed.

pub mod aer;
pub mod compile;
pub mod corpus;
pub mod example;
pub mod lang;
pub mod manifest;
pub mod metrics;
pub mod noise;
pub mod orchestrator;
pub mod profiles;
pub mod rng;
pub mod syntax;
pub mod tokenizer;

pub use example::{Objective, TrainingExample};
pub use lang::Language;
pub use tokenizer::{TokenizedDocument, Vocabulary};

use std::path::{Path, PathBuf};

/// Crate-level error; each stage has its own error type wrapped here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Tokenizer(#[from] tokenizer::TokenizerError),
    #[error(transparent)]
    Profile(#[from] profiles::ProfileError),
    #[error(transparent)]
    Aer(#[from] aer::AerError),
    #[error(transparent)]
    Noise(#[from] noise::NoiseError),
    #[error(transparent)]
    Compile(#[from] compile::CompileError),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Metric(#[from] metrics::MetricError),
    #[error(transparent)]
    Orchestrator(#[from] orchestrator::OrchestratorError),
    #[error("{0}")]
    Data(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// True for failures caused by an external tool (compiler, labeler, translator process).
    pub fn is_external(&self) -> bool {
        match self {
            Error::Compile(e) => e.is_external(),
            Error::Corpus(e) => e.is_external(),
            Error::Orchestrator(e) => e.is_external(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
