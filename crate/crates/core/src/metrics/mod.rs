//! Translation quality metrics over word tokens.

mod bleu;
mod chrf;
pub mod codebleu;
mod rouge;

pub use bleu::{bleu, bleu_stats, corpus_bleu, BleuStats};
pub use chrf::chrf;
pub use codebleu::{codebleu, CodeBleuScore, CodeBleuWeights};
pub use rouge::{lcs_len, rouge_l};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lang::Language;
use crate::syntax::SyntaxError;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("no reference given")]
    EmptyReference,
    #[error("no pairs to score")]
    EmptyCorpus,
    #[error("codebleu weights: {0}")]
    Weights(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// The word segmentation used by every metric.
pub fn tokens(text: &str) -> Vec<&str> {
    crate::tokenizer::words(text)
}

/// One line of a scoring input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    #[serde(default)]
    pub id: String,
    pub hypothesis: String,
    pub reference: String,
    #[serde(default)]
    pub language: Option<Language>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub id: String,
    pub language: Language,
    pub bleu: f64,
    pub codebleu: CodeBleuScore,
    pub chrf: f64,
    pub rouge_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub pairs: usize,
    /// Pooled n-gram statistics over the whole corpus.
    pub bleu: f64,
    pub bleu_sentence_mean: f64,
    pub codebleu: f64,
    pub ngram: f64,
    pub weighted_ngram: f64,
    /// Mean over pairs whose reference parsed; `None` if none did.
    pub ast_match: Option<f64>,
    pub dataflow_match: Option<f64>,
    pub chrf: f64,
    pub rouge_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub pairs: Vec<PairScore>,
    pub corpus: CorpusScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Language of pairs that do not name one.
    pub language: Language,
    pub weights: CodeBleuWeights,
    /// Keyword set for weighted n-grams; the language's shipped list when `None`.
    pub keywords: Option<BTreeSet<String>>,
    pub max_n: usize,
    pub chrf_n: usize,
    pub chrf_beta: f64,
}

impl ReportOptions {
    pub fn new(language: Language) -> Self {
        Self { language, weights: CodeBleuWeights::default(), keywords: None, max_n: 4, chrf_n: 6, chrf_beta: 2.0 }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Score every pair (in parallel) and aggregate.
pub fn corpus_report(pairs: &[ScorePair], opts: &ReportOptions) -> Result<MetricReport, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    opts.weights.validate()?;
    let keyword_sets: Vec<(Language, BTreeSet<String>)> = Language::ALL
        .iter()
        .map(|&l| (l, opts.keywords.clone().unwrap_or_else(|| l.default_keywords())))
        .collect();

    let scored: Vec<(PairScore, BleuStats)> = pairs
        .par_iter()
        .map(|p| {
            let lang = p.language.unwrap_or(opts.language);
            let kw = &keyword_sets.iter().find(|(l, _)| *l == lang).expect("all languages present").1;
            let h = tokens(&p.hypothesis);
            let stats = bleu_stats(&h, &[tokens(&p.reference)], opts.max_n, &|_| 1.0)?;
            let score = PairScore {
                id: p.id.clone(),
                language: lang,
                bleu: stats.score(),
                codebleu: codebleu(&p.hypothesis, &p.reference, lang, opts.weights, kw)?,
                chrf: chrf(&p.hypothesis, &p.reference, opts.chrf_n, opts.chrf_beta),
                rouge_l: rouge_l(&p.hypothesis, &p.reference),
            };
            Ok((score, stats))
        })
        .collect::<Result<_, MetricError>>()?;

    let mut pooled = BleuStats::zero(opts.max_n);
    for (_, s) in &scored {
        pooled.add(s);
    }
    let ps: Vec<PairScore> = scored.into_iter().map(|(p, _)| p).collect();
    let n = ps.len();
    let avg = |f: &dyn Fn(&PairScore) -> f64| mean(ps.iter().map(f)).unwrap_or(0.0);
    let corpus = CorpusScores {
        pairs: n,
        bleu: pooled.score(),
        bleu_sentence_mean: avg(&|p| p.bleu),
        codebleu: avg(&|p| p.codebleu.codebleu),
        ngram: avg(&|p| p.codebleu.ngram),
        weighted_ngram: avg(&|p| p.codebleu.weighted_ngram),
        ast_match: mean(ps.iter().filter_map(|p| p.codebleu.ast_match)),
        dataflow_match: mean(ps.iter().filter_map(|p| p.codebleu.dataflow_match)),
        chrf: avg(&|p| p.chrf),
        rouge_l: avg(&|p| p.rouge_l),
    };
    Ok(MetricReport { pairs: ps, corpus, compile_accuracy: None })
}
