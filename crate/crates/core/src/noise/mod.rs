//! Corruption of tokenized documents into training examples.

mod dae;
mod mlm;

pub use dae::{corrupt_dae, DaeNoiser, DaeTrace};
pub use mlm::{corrupt_mlm, mask_words, MlmTrace};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lang::Language;
use crate::tokenizer::{TokenizedDocument, TokenizerError, Vocabulary};

#[derive(Debug, thiserror::Error)]
pub enum NoiseError {
    #[error("no language profile for {0}")]
    MissingProfile(Language),
    #[error("no profile for any language other than {0} to draw inserted words from")]
    NoForeignProfile(Language),
    #[error("invalid noise config: {0}")]
    Config(String),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub mask_ratio: f64,
    pub drop_ratio: f64,
    pub insert_ratio: f64,
    pub shuffle_window: usize,
    /// Multiplier on the drop probability of reserved keywords.
    pub keyword_weight: f64,
    pub epoch_increment: f64,
    pub max_ratio: f64,
    pub seed: u64,
    /// Exponent applied to foreign word frequencies before sampling (1 = raw).
    pub insert_smoothing: f64,
    /// Only insert foreign words that never occur in the document's own language.
    pub insert_exclusive: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            mask_ratio: 0.15,
            drop_ratio: 0.25,
            insert_ratio: 0.15,
            shuffle_window: 3,
            keyword_weight: 3.0,
            epoch_increment: 0.025,
            max_ratio: 0.5,
            seed: 0,
            insert_smoothing: 1.0,
            insert_exclusive: true,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), NoiseError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(NoiseError::Config(format!("{name} = {v} is outside [0, 1]")))
            }
        };
        unit("mask_ratio", self.mask_ratio)?;
        unit("drop_ratio", self.drop_ratio)?;
        unit("insert_ratio", self.insert_ratio)?;
        unit("epoch_increment", self.epoch_increment)?;
        unit("max_ratio", self.max_ratio)?;
        if self.shuffle_window == 0 {
            return Err(NoiseError::Config("shuffle_window must be >= 1".into()));
        }
        if self.keyword_weight.is_nan() || self.keyword_weight < 1.0 {
            return Err(NoiseError::Config("keyword_weight must be >= 1".into()));
        }
        if self.insert_smoothing.is_nan() || self.insert_smoothing <= 0.0 {
            return Err(NoiseError::Config("insert_smoothing must be > 0".into()));
        }
        Ok(())
    }

    /// The three corruption ratios after `epoch` steps of the schedule.
    pub fn scheduled(&self, epoch: u32) -> ScheduledRatios {
        ScheduledRatios {
            mask: schedule_ratio(self.mask_ratio, epoch, self),
            drop: schedule_ratio(self.drop_ratio, epoch, self),
            insert: schedule_ratio(self.insert_ratio, epoch, self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledRatios {
    pub mask: f64,
    pub drop: f64,
    pub insert: f64,
}

const RATIO_UNITS: f64 = 1e9;

fn to_units(x: f64) -> i64 {
    (x * RATIO_UNITS).round() as i64
}

/// `min(base + epoch * increment, max_ratio)`.
///
/// Ratios are carried as integer billionths so the linear ramp lands on the
/// decimal values it names (0.25 + 4 * 0.025 is exactly 0.35).
pub fn schedule_ratio(base: f64, epoch: u32, cfg: &NoiseConfig) -> f64 {
    let ramp = to_units(base) + epoch as i64 * to_units(cfg.epoch_increment);
    ramp.min(to_units(cfg.max_ratio)) as f64 / RATIO_UNITS
}

/// Words that hold more than whitespace; only these are ever corrupted.
pub(crate) fn eligible_words(doc: &TokenizedDocument, vocab: &Vocabulary) -> Result<Vec<bool>, TokenizerError> {
    (0..doc.word_count())
        .map(|w| Ok(vocab.decode_bytes(doc.word_tokens(w))?.iter().any(|b| !b.is_ascii_whitespace())))
        .collect()
}

/// Randomly round `x` to a neighbouring integer with expectation `x`.
pub(crate) fn stochastic_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> usize {
    let floor = x.floor();
    let frac = x - floor;
    floor as usize + usize::from(frac > 0.0 && rng.random::<f64>() < frac)
}

/// Pick whole words in random order until `ratio` of `total_tokens` is covered.
///
/// The last word that would overshoot the budget is taken with probability
/// equal to the fraction of it that still fits, so the expected number of
/// selected tokens equals the budget when words are single tokens.
pub(crate) fn select_words<R: Rng + ?Sized>(
    candidates: &[usize],
    word_len: impl Fn(usize) -> usize,
    ratio: f64,
    total_tokens: usize,
    rng: &mut R,
) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let budget = ratio * total_tokens as f64;
    if budget <= 0.0 {
        return Vec::new();
    }
    let mut order = candidates.to_vec();
    order.shuffle(rng);
    let mut chosen = Vec::new();
    let mut used = 0usize;
    for w in order {
        let len = word_len(w);
        if (used + len) as f64 <= budget + 1e-9 {
            chosen.push(w);
            used += len;
        } else {
            let p = (budget - used as f64) / len as f64;
            if rng.random::<f64>() < p {
                chosen.push(w);
            }
            break;
        }
    }
    chosen.sort_unstable();
    chosen
}
