use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bt::{run_dae_bt_epoch, EpochConfig, EpochReport, DEFAULT_BEAM_SIZE};
use super::port::TranslatorPort;
use super::pretrain::{emit_pretrain_stream, finetune_examples, PretrainConfig};
use super::{select_checkpoint, Criterion, OrchestratorError};
use crate::aer::AerTagSet;
use crate::example::{Objective, TrainingExample};
use crate::lang::Language;
use crate::noise::{DaeNoiser, NoiseConfig};
use crate::profiles::ProfileSet;
use crate::tokenizer::{TokenizedDocument, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Mlm,
    Aer,
    DaeBt,
    Finetune,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub kind: PhaseKind,
    pub epochs: u32,
    /// Overrides the plan's language pairs for this phase.
    #[serde(default)]
    pub pairs: Option<Vec<(Language, Language)>>,
    /// Overrides the plan's noise settings for this phase.
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

/// Training recipe read from TOML:
///
/// ```toml
/// seed = 7
/// batch_size = 16
/// pairs = [["cpp", "cuda"]]
///
/// [noise]
/// drop_ratio = 0.25
///
/// [[phase]]
/// kind = "mlm"
/// epochs = 1
///
/// [[phase]]
/// kind = "dae_bt"
/// epochs = 3
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulePlan {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_beam")]
    pub beam_size: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Language pairs, visited in order within each DAE+BT epoch.
    #[serde(default = "default_pairs")]
    pub pairs: Vec<(Language, Language)>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub measure_reconstruction: bool,
    #[serde(rename = "phase")]
    pub phases: Vec<Phase>,
}

fn default_beam() -> usize {
    DEFAULT_BEAM_SIZE
}

fn default_batch() -> usize {
    32
}

fn default_pairs() -> Vec<(Language, Language)> {
    vec![(Language::Cpp, Language::Cuda)]
}

impl SchedulePlan {
    pub fn from_toml(text: &str) -> Result<Self, OrchestratorError> {
        let plan: Self = toml::from_str(text).map_err(|e| OrchestratorError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Plan(m));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.beam_size == 0 {
            return bad("beam_size must be >= 1".into());
        }
        if self.phases.is_empty() {
            return bad("no [[phase]] entries".into());
        }
        self.noise.validate()?;
        for (i, p) in self.phases.iter().enumerate() {
            if let Some(n) = &p.noise {
                n.validate()?;
            }
            let pairs = p.pairs.as_ref().unwrap_or(&self.pairs);
            if p.kind == PhaseKind::DaeBt && pairs.is_empty() {
                return bad(format!("phase {i}: dae_bt needs at least one language pair"));
            }
            if let Some((a, _)) = pairs.iter().find(|(a, b)| a == b) {
                return bad(format!("phase {i}: pair {a} -> {a} is not a translation direction"));
            }
        }
        Ok(())
    }
}

pub struct PlanInputs<'a> {
    pub vocab: &'a Vocabulary,
    pub profiles: &'a ProfileSet,
    pub tagset: AerTagSet,
    pub corpora: BTreeMap<Language, Vec<TokenizedDocument>>,
    /// Aligned (source, target) documents for finetuning.
    pub parallel: Vec<(TokenizedDocument, TokenizedDocument)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u32,
    pub batches: usize,
    pub examples: usize,
    pub skipped: usize,
    pub mean_loss: Option<f64>,
    /// One report per language pair for DAE+BT epochs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dae_bt: Vec<EpochReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub kind: PhaseKind,
    pub epochs: Vec<EpochRecord>,
    /// Epoch with the lowest mean training loss.
    pub best_epoch: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub phases: Vec<PhaseReport>,
    pub decoder_initialized: bool,
    pub train_steps: usize,
}

fn train_batches(
    examples: &[TrainingExample],
    batch_size: usize,
    translator: &mut dyn TranslatorPort,
    on_batch: &mut dyn FnMut(&[TrainingExample]),
) -> Result<(usize, Option<f64>), OrchestratorError> {
    let mut total = 0.0;
    let mut n = 0;
    for batch in examples.chunks(batch_size) {
        on_batch(batch);
        total += translator.train_step(batch)?;
        n += 1;
    }
    Ok((n, (n > 0).then(|| total / n as f64)))
}

/// Run every phase of `plan` in order against `translator`.
pub fn run_plan(
    plan: &SchedulePlan,
    inputs: &PlanInputs<'_>,
    translator: &mut dyn TranslatorPort,
    on_batch: &mut dyn FnMut(&[TrainingExample]),
) -> Result<PlanReport, OrchestratorError> {
    plan.validate()?;
    let mut report = PlanReport::default();
    let all: Vec<&[TokenizedDocument]> = inputs.corpora.values().map(Vec::as_slice).collect();
    let mut dae_epoch = 0u32;
    for phase in &plan.phases {
        let noise = phase.noise.clone().unwrap_or_else(|| plan.noise.clone());
        let pairs = phase.pairs.as_ref().unwrap_or(&plan.pairs);
        let mut epochs = Vec::new();
        for epoch in 0..phase.epochs {
            let record = match phase.kind {
                PhaseKind::Mlm | PhaseKind::Aer => {
                    let objective = if phase.kind == PhaseKind::Mlm { Objective::Mlm } else { Objective::Aer };
                    let cfg = PretrainConfig { mask_ratio: noise.mask_ratio, seed: plan.seed, tagset: inputs.tagset.clone() };
                    let stream = emit_pretrain_stream(&all, objective, epoch, inputs.vocab, &cfg)?;
                    let (batches, mean_loss) = train_batches(&stream.examples, plan.batch_size, translator, on_batch)?;
                    report.train_steps += batches;
                    EpochRecord { epoch, batches, examples: stream.examples.len(), skipped: stream.skipped, mean_loss, dae_bt: Vec::new() }
                }
                PhaseKind::Finetune => {
                    if inputs.parallel.is_empty() {
                        return Err(OrchestratorError::Plan("finetune phase without parallel data".into()));
                    }
                    let examples = finetune_examples(&inputs.parallel, inputs.vocab, epoch)?;
                    let (batches, mean_loss) = train_batches(&examples, plan.batch_size, translator, on_batch)?;
                    report.train_steps += batches;
                    EpochRecord { epoch, batches, examples: examples.len(), skipped: 0, mean_loss, dae_bt: Vec::new() }
                }
                PhaseKind::DaeBt => {
                    if !report.decoder_initialized {
                        translator.init_decoder_from_encoder()?;
                        report.decoder_initialized = true;
                    }
                    let noiser = DaeNoiser::new(inputs.vocab, inputs.profiles, noise.clone())?;
                    let mut reports = Vec::new();
                    for &(a, b) in pairs {
                        let empty = Vec::new();
                        let ca = inputs.corpora.get(&a).unwrap_or(&empty);
                        let cb = inputs.corpora.get(&b).unwrap_or(&empty);
                        let cfg = EpochConfig {
                            epoch: dae_epoch,
                            batch_size: plan.batch_size,
                            beam_size: plan.beam_size,
                            seed: plan.seed,
                            measure_reconstruction: plan.measure_reconstruction,
                        };
                        reports.push(run_dae_bt_epoch((a, ca), (b, cb), translator, &noiser, inputs.vocab, &cfg, on_batch)?);
                    }
                    dae_epoch += 1;
                    let batches: usize = reports.iter().map(|r| r.dae_batches + r.bt_batches).sum();
                    report.train_steps += batches;
                    let loss_sum: f64 = reports.iter().filter_map(|r| r.mean_loss().map(|l| l * (r.dae_batches + r.bt_batches) as f64)).sum();
                    EpochRecord {
                        epoch,
                        batches,
                        examples: reports.iter().map(|r| r.dae_examples + r.bt_examples).sum(),
                        skipped: reports.iter().map(|r| r.translator_failures).sum(),
                        mean_loss: (batches > 0).then(|| loss_sum / batches as f64),
                        dae_bt: reports,
                    }
                }
            };
            tracing::info!(phase = ?phase.kind, epoch, batches = record.batches, loss = ?record.mean_loss, "epoch done");
            epochs.push(record);
        }
        let history: Vec<(u32, f64)> = epochs.iter().filter_map(|r| r.mean_loss.map(|l| (r.epoch, l))).collect();
        let best_epoch = select_checkpoint(&history, Criterion::Min).ok();
        report.phases.push(PhaseReport { kind: phase.kind, epochs, best_epoch });
    }
    Ok(report)
}
