//! Objective scheduling over a pluggable translator.

mod bt;
mod external;
mod plan;
mod port;
mod pretrain;

pub use bt::{bt_round_trip, run_dae_bt_epoch, EpochConfig, EpochReport, RoundTrip, DEFAULT_BEAM_SIZE};
pub use external::ExternalTranslator;
pub use plan::{run_plan, EpochRecord, Phase, PhaseKind, PhaseReport, PlanInputs, PlanReport, SchedulePlan};
pub use port::{StepRecord, StubDictionary, StubIdentity, TranslatorError, TranslatorPort};
pub use pretrain::{emit_pretrain_stream, finetune_examples, PretrainConfig, PretrainStream};

use serde::{Deserialize, Serialize};

use crate::aer::AerError;
use crate::lang::Language;
use crate::noise::NoiseError;
use crate::tokenizer::TokenizerError;

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Translator(#[from] TranslatorError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Aer(#[from] AerError),
    #[error("the {0} corpus is empty while its partner is not")]
    UnpairedCorpus(Language),
    #[error("checkpoint history is empty")]
    EmptyHistory,
    #[error("{0} is not a pretraining objective")]
    NotPretraining(crate::example::Objective),
    #[error("schedule plan: {0}")]
    Plan(String),
}

impl OrchestratorError {
    pub fn is_external(&self) -> bool {
        matches!(self, OrchestratorError::Translator(TranslatorError::Process(_) | TranslatorError::Protocol(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Min,
    Max,
}

/// Epoch with the best score; ties go to the earliest epoch, NaN scores are ignored.
pub fn select_checkpoint(history: &[(u32, f64)], criterion: Criterion) -> Result<u32, OrchestratorError> {
    let better = |a: f64, b: f64| match criterion {
        Criterion::Min => a < b,
        Criterion::Max => a > b,
    };
    let mut best: Option<(u32, f64)> = None;
    for &(epoch, score) in history.iter().filter(|(_, s)| !s.is_nan()) {
        best = match best {
            Some((e, s)) if !better(score, s) && !(score == s && epoch < e) => Some((e, s)),
            _ => Some((epoch, score)),
        };
    }
    best.map(|(e, _)| e).ok_or(OrchestratorError::EmptyHistory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn checkpoint_examples() {
        assert_eq!(select_checkpoint(&[(0, 5.2), (1, 4.1), (2, 4.4)], Criterion::Min).unwrap(), 1);
        assert_eq!(select_checkpoint(&[(0, 4.1), (1, 4.1)], Criterion::Min).unwrap(), 0);
        assert_eq!(select_checkpoint(&[(0, 70.0), (1, 76.9)], Criterion::Max).unwrap(), 1);
        assert_eq!(select_checkpoint(&[(3, 1.0), (1, 1.0)], Criterion::Max).unwrap(), 1);
        assert_eq!(select_checkpoint(&[(0, f64::NAN), (1, 9.0)], Criterion::Min).unwrap(), 1);
        assert!(matches!(select_checkpoint(&[], Criterion::Min), Err(OrchestratorError::EmptyHistory)));
        assert!(matches!(select_checkpoint(&[(0, f64::NAN)], Criterion::Min), Err(OrchestratorError::EmptyHistory)));
    }

    proptest! {
        #[test]
        fn checkpoint_is_optimal(scores in prop::collection::vec(0u8..20, 1..30)) {
            let h: Vec<(u32, f64)> = scores.iter().enumerate().map(|(i, &s)| (i as u32, s as f64)).collect();
            let lo = *scores.iter().min().unwrap();
            let first = scores.iter().position(|&s| s == lo).unwrap() as u32;
            prop_assert_eq!(select_checkpoint(&h, Criterion::Min).unwrap(), first);
            let hi = *scores.iter().max().unwrap();
            let first = scores.iter().position(|&s| s == hi).unwrap() as u32;
            prop_assert_eq!(select_checkpoint(&h, Criterion::Max).unwrap(), first);
        }
    }
}
