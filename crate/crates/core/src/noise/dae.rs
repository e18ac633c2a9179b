use rand::Rng;

use super::{eligible_words, select_words, stochastic_round, NoiseConfig, NoiseError};
use crate::example::{Objective, TrainingExample};
use crate::lang::Language;
use crate::profiles::{ProfileSet, WordSampler};
use crate::tokenizer::{TokenizedDocument, Vocabulary};

/// Bookkeeping for one DAE corruption, used by calibration checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DaeTrace {
    pub original_words: usize,
    pub keyword_words: usize,
    pub dropped_words: usize,
    pub dropped_keywords: usize,
    /// Tokens of the surviving original words, before insertion.
    pub surviving_tokens: usize,
    pub masked_tokens: usize,
    pub inserted_words: Vec<String>,
    pub inserted_tokens: usize,
    /// `permutation[j]` is the pre-shuffle position of output token `j`
    /// (language token excluded).
    pub permutation: Vec<usize>,
}

struct Piece {
    tokens: Vec<u32>,
    inserted: bool,
}

/// Drop probabilities proportional to `weights`, summing to `ratio * n`,
/// each capped at 1 (excess is spread over the uncapped words).
fn drop_probabilities(weights: &[f64], ratio: f64) -> Vec<f64> {
    let n = weights.len();
    let target = ratio * n as f64;
    let mut capped = vec![false; n];
    loop {
        let fixed = capped.iter().filter(|&&c| c).count() as f64;
        let free_weight: f64 = weights.iter().zip(&capped).filter(|(_, &c)| !c).map(|(w, _)| w).sum();
        if free_weight <= 0.0 {
            return capped.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
        }
        let scale = ((target - fixed) / free_weight).max(0.0);
        let mut changed = false;
        for i in 0..n {
            if !capped[i] && scale * weights[i] > 1.0 {
                capped[i] = true;
                changed = true;
            }
        }
        if !changed {
            return (0..n).map(|i| if capped[i] { 1.0 } else { scale * weights[i] }).collect();
        }
    }
}

/// DAE corruption with the language profiles' samplers prepared once.
pub struct DaeNoiser<'a> {
    vocab: &'a Vocabulary,
    profiles: &'a ProfileSet,
    cfg: NoiseConfig,
    /// (document language, sampler over another language's words)
    foreign: Vec<(Language, Option<WordSampler>)>,
}

impl<'a> DaeNoiser<'a> {
    pub fn new(vocab: &'a Vocabulary, profiles: &'a ProfileSet, cfg: NoiseConfig) -> Result<Self, NoiseError> {
        cfg.validate()?;
        vocab.mask_id()?;
        let mut foreign = Vec::new();
        for &own in &Language::ALL {
            let exclude = if cfg.insert_exclusive { profiles.get(&own) } else { None };
            for p in profiles.values().filter(|p| p.language != own) {
                foreign.push((own, p.sampler(cfg.insert_smoothing, exclude)));
            }
        }
        Ok(Self { vocab, profiles, cfg, foreign })
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.cfg
    }

    fn samplers_for(&self, own: Language) -> Vec<&WordSampler> {
        self.foreign
            .iter()
            .filter(|(l, _)| *l == own)
            .filter_map(|(_, s)| s.as_ref())
            .collect()
    }

    pub fn corrupt<R: Rng + ?Sized>(
        &self,
        doc: &TokenizedDocument,
        epoch: u32,
        rng: &mut R,
    ) -> Result<(TrainingExample, DaeTrace), NoiseError> {
        let vocab = self.vocab;
        let own = self.profiles.get(&doc.language).ok_or(NoiseError::MissingProfile(doc.language))?;
        if !self.profiles.keys().any(|&l| l != doc.language) {
            return Err(NoiseError::NoForeignProfile(doc.language));
        }
        let ratios = self.cfg.scheduled(epoch);
        let eligible = eligible_words(doc, vocab)?;
        let words: Vec<usize> = (0..doc.word_count()).filter(|&w| eligible[w]).collect();
        let mut trace = DaeTrace { original_words: words.len(), ..Default::default() };

        // 1. weighted dropping over whole words
        let is_kw: Vec<bool> = words
            .iter()
            .map(|&w| Ok(own.is_keyword(vocab.decode(doc.word_tokens(w))?.trim())))
            .collect::<Result<_, NoiseError>>()?;
        trace.keyword_words = is_kw.iter().filter(|&&k| k).count();
        let weights: Vec<f64> = is_kw.iter().map(|&k| if k { self.cfg.keyword_weight } else { 1.0 }).collect();
        let probs = drop_probabilities(&weights, ratios.drop);
        let mut survivors = Vec::with_capacity(words.len());
        for (i, &w) in words.iter().enumerate() {
            if rng.random::<f64>() < probs[i] {
                trace.dropped_words += 1;
                trace.dropped_keywords += usize::from(is_kw[i]);
            } else {
                survivors.push(w);
            }
        }

        // 2. whole-word masking over the survivors
        let word_len = |w: usize| doc.word_spans[w].1 - doc.word_spans[w].0;
        trace.surviving_tokens = survivors.iter().map(|&w| word_len(w)).sum();
        let masked = select_words(&survivors, word_len, ratios.mask, trace.surviving_tokens, rng);
        let mask = vocab.mask_id()?;
        let mut pieces: Vec<Piece> = survivors
            .iter()
            .map(|&w| {
                let tokens = if masked.binary_search(&w).is_ok() {
                    trace.masked_tokens += word_len(w);
                    vec![mask; word_len(w)]
                } else {
                    doc.word_tokens(w).to_vec()
                };
                Piece { tokens, inserted: false }
            })
            .collect();

        // 3. foreign word insertion at uniform positions
        let samplers = self.samplers_for(doc.language);
        let n_insert = if samplers.is_empty() { 0 } else { stochastic_round(ratios.insert * words.len() as f64, rng) };
        for _ in 0..n_insert {
            let sampler = samplers[rng.random_range(0..samplers.len())];
            let word = sampler.sample(rng).to_string();
            let tokens = vocab.encode_word(format!(" {word}").as_bytes());
            trace.inserted_tokens += tokens.len();
            trace.inserted_words.push(word);
            let at = rng.random_range(0..=pieces.len());
            pieces.insert(at, Piece { tokens, inserted: true });
        }
        debug_assert_eq!(pieces.iter().filter(|p| p.inserted).count(), n_insert);

        // 4. local shuffle: token i moves by less than `shuffle_window`
        let flat: Vec<u32> = pieces.into_iter().flat_map(|p| p.tokens).collect();
        let window = self.cfg.shuffle_window as f64;
        let mut keyed: Vec<(f64, usize)> = (0..flat.len())
            .map(|i| (i as f64 + if window > 1.0 { rng.random::<f64>() * window } else { 0.0 }, i))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        trace.permutation = keyed.iter().map(|&(_, i)| i).collect();

        let mut input = Vec::with_capacity(flat.len() + 1);
        input.push(vocab.lang_id(doc.language)?);
        input.extend(trace.permutation.iter().map(|&i| flat[i]));
        // Trailing whitespace words are never corrupted; keep them at the end.
        for (w, _) in eligible.iter().enumerate().filter(|(_, e)| !**e) {
            input.extend_from_slice(doc.word_tokens(w));
        }

        let example = TrainingExample {
            objective: Objective::Dae,
            src_lang: doc.language,
            tgt_lang: doc.language,
            input,
            target: doc.tokens.clone(),
            epoch,
        };
        Ok((example, trace))
    }
}

pub fn corrupt_dae<R: Rng + ?Sized>(
    doc: &TokenizedDocument,
    vocab: &Vocabulary,
    profiles: &ProfileSet,
    cfg: &NoiseConfig,
    epoch: u32,
    rng: &mut R,
) -> Result<TrainingExample, NoiseError> {
    Ok(DaeNoiser::new(vocab, profiles, cfg.clone())?.corrupt(doc, epoch, rng)?.0)
}
