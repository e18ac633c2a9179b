use crate::aer::{AerLabeler, AerTagSet};
use crate::example::{Objective, TrainingExample};
use crate::noise::corrupt_mlm;
use crate::rng::{domain, stream};
use crate::tokenizer::{TokenizedDocument, Vocabulary};

use super::OrchestratorError;

#[derive(Debug, Clone)]
pub struct PretrainConfig {
    pub mask_ratio: f64,
    pub seed: u64,
    pub tagset: AerTagSet,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self { mask_ratio: 0.15, seed: 0, tagset: AerTagSet::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PretrainStream {
    pub examples: Vec<TrainingExample>,
    /// Documents left out because they could not be labeled.
    pub skipped: usize,
}

/// Visit documents of several corpora in round-robin order: a0, b0, a1, b1, ...
/// A corpus that runs out simply drops out of the rotation.
fn round_robin<'a>(corpora: &'a [&'a [TokenizedDocument]]) -> impl Iterator<Item = (usize, usize, &'a TokenizedDocument)> {
    let longest = corpora.iter().map(|c| c.len()).max().unwrap_or(0);
    (0..longest).flat_map(move |i| corpora.iter().enumerate().filter_map(move |(l, c)| c.get(i).map(|d| (l, i, d))))
}

/// MLM or AER examples for one epoch over a mixed-language corpus.
///
/// Inputs carry no language token. AER labels come from parsing each
/// document's decoded text; documents that fail to parse are skipped.
pub fn emit_pretrain_stream(
    corpora: &[&[TokenizedDocument]],
    objective: Objective,
    epoch: u32,
    vocab: &Vocabulary,
    cfg: &PretrainConfig,
) -> Result<PretrainStream, OrchestratorError> {
    let mut out = PretrainStream::default();
    match objective {
        Objective::Mlm => {
            for (l, i, doc) in round_robin(corpora) {
                let mut rng = stream(cfg.seed, &[domain::MLM, epoch as u64, l as u64, i as u64]);
                out.examples.push(corrupt_mlm(doc, vocab, cfg.mask_ratio, epoch, &mut rng)?.0);
            }
        }
        Objective::Aer => {
            let mut labelers: Vec<(crate::lang::Language, AerLabeler)> = Vec::new();
            for (_, _, doc) in round_robin(corpora) {
                if !labelers.iter().any(|(l, _)| *l == doc.language) {
                    labelers.push((doc.language, AerLabeler::new(doc.language, cfg.tagset.clone())));
                }
                let labeler = &labelers.iter().find(|(l, _)| *l == doc.language).expect("inserted above").1;
                let text = vocab.decode(&doc.tokens)?;
                match labeler.label(&text, vocab) {
                    Ok(labeled) if labeled.doc.tokens == doc.tokens => out.examples.push(TrainingExample {
                        objective: Objective::Aer,
                        src_lang: doc.language,
                        tgt_lang: doc.language,
                        input: labeled.doc.tokens,
                        target: labeled.labels,
                        epoch,
                    }),
                    Ok(_) => {
                        tracing::warn!(doc = %doc.doc_id, "AER: tokens do not re-encode identically, skipped");
                        out.skipped += 1;
                    }
                    Err(e) => {
                        tracing::warn!(doc = %doc.doc_id, "AER: {e}, skipped");
                        out.skipped += 1;
                    }
                }
            }
        }
        other => return Err(OrchestratorError::NotPretraining(other)),
    }
    Ok(out)
}

/// Supervised pairs as `<tgt> + source -> target` examples.
pub fn finetune_examples(
    pairs: &[(TokenizedDocument, TokenizedDocument)],
    vocab: &Vocabulary,
    epoch: u32,
) -> Result<Vec<TrainingExample>, OrchestratorError> {
    pairs
        .iter()
        .map(|(s, t)| {
            let mut input = vec![vocab.lang_id(t.language)?];
            input.extend_from_slice(&s.tokens);
            Ok(TrainingExample {
                objective: Objective::Finetune,
                src_lang: s.language,
                tgt_lang: t.language,
                input,
                target: t.tokens.clone(),
                epoch,
            })
        })
        .collect()
}
