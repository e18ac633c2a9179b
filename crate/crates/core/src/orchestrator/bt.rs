use serde::{Deserialize, Serialize};

use super::port::TranslatorPort;
use super::OrchestratorError;
use crate::example::{Objective, TrainingExample};
use crate::lang::Language;
use crate::noise::DaeNoiser;
use crate::rng::{domain, stream};
use crate::tokenizer::{TokenizedDocument, Vocabulary};

pub const DEFAULT_BEAM_SIZE: usize = 5;

/// Back-translation examples for one batch and the number of documents the
/// translator rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrip {
    pub examples: Vec<TrainingExample>,
    /// Forward translations, aligned with `examples`.
    pub intermediates: Vec<Vec<u32>>,
    pub failures: usize,
}

/// Translate each document `src -> tgt` and emit `<tgt> + intermediate -> original`.
pub fn bt_round_trip(
    batch: &[TokenizedDocument],
    translator: &dyn TranslatorPort,
    src: Language,
    tgt: Language,
    beam_size: usize,
    vocab: &Vocabulary,
    epoch: u32,
) -> Result<RoundTrip, OrchestratorError> {
    let tgt_token = vocab.lang_id(tgt)?;
    let mut out = RoundTrip { examples: Vec::new(), intermediates: Vec::new(), failures: 0 };
    for doc in batch {
        match translator.translate(&doc.tokens, src, tgt, beam_size) {
            Ok(mid) => {
                let mut input = Vec::with_capacity(mid.len() + 1);
                input.push(tgt_token);
                input.extend_from_slice(&mid);
                out.examples.push(TrainingExample {
                    objective: Objective::Bt,
                    src_lang: tgt,
                    tgt_lang: src,
                    input,
                    target: doc.tokens.clone(),
                    epoch,
                });
                out.intermediates.push(mid);
            }
            Err(e) if e.is_per_document() => {
                tracing::warn!(doc = %doc.doc_id, "{src} -> {tgt} translation failed: {e}");
                out.failures += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EpochConfig {
    pub epoch: u32,
    pub batch_size: usize,
    pub beam_size: usize,
    pub seed: u64,
    /// Translate every BT input back and count exact reconstructions.
    pub measure_reconstruction: bool,
}

impl EpochConfig {
    pub fn new(epoch: u32, seed: u64) -> Self {
        Self { epoch, batch_size: 32, beam_size: DEFAULT_BEAM_SIZE, seed, measure_reconstruction: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: u32,
    pub dae_batches: usize,
    pub bt_batches: usize,
    pub dae_examples: usize,
    pub bt_examples: usize,
    pub mean_dae_loss: Option<f64>,
    pub mean_bt_loss: Option<f64>,
    pub translator_failures: usize,
    /// Objective of every `train_step` call, in order.
    pub schedule: Vec<Objective>,
    /// Forward direction of every BT batch, in order.
    pub bt_directions: Vec<(Language, Language)>,
    pub reconstruction_exact: usize,
    pub reconstruction_total: usize,
}

impl EpochReport {
    pub fn reconstruction_rate(&self) -> Option<f64> {
        (self.reconstruction_total > 0).then(|| 100.0 * self.reconstruction_exact as f64 / self.reconstruction_total as f64)
    }

    pub fn mean_loss(&self) -> Option<f64> {
        let n = self.dae_batches + self.bt_batches;
        let s = self.mean_dae_loss.unwrap_or(0.0) * self.dae_batches as f64 + self.mean_bt_loss.unwrap_or(0.0) * self.bt_batches as f64;
        (n > 0).then(|| s / n as f64)
    }
}

/// One epoch of alternating DAE and BT batches over a language pair.
///
/// DAE batches take chunks from the two corpora in turn (a1, b1, a2, b2, ...).
/// Each is followed by a BT batch whose forward direction alternates a->b,
/// b->a, drawing that language's chunks cyclically. `on_batch` sees every
/// batch before it is trained on.
#[allow(clippy::too_many_arguments)]
pub fn run_dae_bt_epoch(
    a: (Language, &[TokenizedDocument]),
    b: (Language, &[TokenizedDocument]),
    translator: &mut dyn TranslatorPort,
    noiser: &DaeNoiser<'_>,
    vocab: &Vocabulary,
    cfg: &EpochConfig,
    on_batch: &mut dyn FnMut(&[TrainingExample]),
) -> Result<EpochReport, OrchestratorError> {
    let mut report = EpochReport { epoch: cfg.epoch, ..Default::default() };
    match (a.1.is_empty(), b.1.is_empty()) {
        (true, true) => return Ok(report),
        (true, false) => return Err(OrchestratorError::UnpairedCorpus(a.0)),
        (false, true) => return Err(OrchestratorError::UnpairedCorpus(b.0)),
        _ => {}
    }
    let size = cfg.batch_size.max(1);
    let chunks = [a.1.chunks(size).collect::<Vec<_>>(), b.1.chunks(size).collect::<Vec<_>>()];
    let langs = [a.0, b.0];

    let mut dae_order: Vec<(usize, usize)> = Vec::new();
    for i in 0..chunks[0].len().max(chunks[1].len()) {
        for (side, c) in chunks.iter().enumerate() {
            if i < c.len() {
                dae_order.push((side, i));
            }
        }
    }

    let (mut dae_loss, mut bt_loss) = (0.0, 0.0);
    let mut bt_cursor = [0usize; 2];
    for (k, &(side, i)) in dae_order.iter().enumerate() {
        let mut batch = Vec::with_capacity(chunks[side][i].len());
        for (j, doc) in chunks[side][i].iter().enumerate() {
            let index = (i * size + j) as u64;
            let mut rng = stream(cfg.seed, &[domain::DAE, cfg.epoch as u64, side as u64, index]);
            batch.push(noiser.corrupt(doc, cfg.epoch, &mut rng)?.0);
        }
        on_batch(&batch);
        dae_loss += translator.train_step(&batch)?;
        report.dae_batches += 1;
        report.dae_examples += batch.len();
        report.schedule.push(Objective::Dae);

        let from = k % 2;
        let (src, tgt) = (langs[from], langs[1 - from]);
        let chunk = chunks[from][bt_cursor[from] % chunks[from].len()];
        bt_cursor[from] += 1;
        let rt = bt_round_trip(chunk, translator, src, tgt, cfg.beam_size, vocab, cfg.epoch)?;
        report.translator_failures += rt.failures;
        report.bt_directions.push((src, tgt));
        if cfg.measure_reconstruction {
            for (ex, mid) in rt.examples.iter().zip(&rt.intermediates) {
                report.reconstruction_total += 1;
                match translator.translate(mid, tgt, src, cfg.beam_size) {
                    Ok(back) if back == ex.target => report.reconstruction_exact += 1,
                    Ok(_) => {}
                    Err(e) if e.is_per_document() => report.translator_failures += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        if rt.examples.is_empty() {
            continue;
        }
        on_batch(&rt.examples);
        bt_loss += translator.train_step(&rt.examples)?;
        report.bt_batches += 1;
        report.bt_examples += rt.examples.len();
        report.schedule.push(Objective::Bt);
    }
    report.mean_dae_loss = (report.dae_batches > 0).then(|| dae_loss / report.dae_batches as f64);
    report.mean_bt_loss = (report.bt_batches > 0).then(|| bt_loss / report.bt_batches as f64);
    Ok(report)
}
