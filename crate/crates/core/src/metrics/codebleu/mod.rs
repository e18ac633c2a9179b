mod ast;
mod dataflow;

pub use ast::{ast_match, subtrees};
pub use dataflow::{dataflow_edges, dataflow_match, Edge, COMES_FROM, COMPUTED_FROM};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::bleu::bleu_stats;
use super::{tokens, MetricError};
use crate::lang::Language;
use crate::syntax;

pub const KEYWORD_WEIGHT: f64 = 4.0;

/// A reference with more than this share of bytes inside error nodes counts as unparsable.
pub const MAX_ERROR_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast: f64,
    pub dataflow: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        Self { ngram: 0.25, weighted_ngram: 0.25, ast: 0.25, dataflow: 0.25 }
    }
}

impl CodeBleuWeights {
    pub fn validate(&self) -> Result<(), MetricError> {
        let w = [self.ngram, self.weighted_ngram, self.ast, self.dataflow];
        if w.iter().any(|x| x.is_nan() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(MetricError::Weights(format!("{w:?} must be non-negative and sum to 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub codebleu: f64,
    pub ngram: f64,
    pub weighted_ngram: f64,
    /// `None` when the reference does not parse.
    pub ast_match: Option<f64>,
    pub dataflow_match: Option<f64>,
    /// Weights actually applied, renormalized when structural components are missing.
    pub weights: CodeBleuWeights,
}

/// CodeBLEU of `hypothesis` against `reference`.
///
/// Unigrams found in `keywords` (compared through [`Language::keyword_key`])
/// weigh [`KEYWORD_WEIGHT`] in the weighted n-gram component.
pub fn codebleu(
    hypothesis: &str,
    reference: &str,
    language: Language,
    weights: CodeBleuWeights,
    keywords: &BTreeSet<String>,
) -> Result<CodeBleuScore, MetricError> {
    weights.validate()?;
    let h = tokens(hypothesis);
    let r = vec![tokens(reference)];
    let ngram = bleu_stats(&h, &r, 4, &|_| 1.0)?.score();
    let kw = |t: &str| if keywords.contains(&language.keyword_key(t)) { KEYWORD_WEIGHT } else { 1.0 };
    let weighted_ngram = bleu_stats(&h, &r, 4, &kw)?.score();

    let ref_tree = syntax::parse(reference, language)?;
    let structural = if syntax::error_fraction(&ref_tree, reference.len()) > MAX_ERROR_FRACTION {
        None
    } else {
        let hyp_tree = syntax::parse(hypothesis, language)?;
        let ast = ast_match(&subtrees(hyp_tree.root_node()), &subtrees(ref_tree.root_node()));
        let df = dataflow_match(
            &dataflow_edges(hyp_tree.root_node(), hypothesis, language),
            &dataflow_edges(ref_tree.root_node(), reference, language),
        );
        Some((ast, df))
    };

    let effective = match structural {
        Some(_) => weights,
        None => {
            let s = weights.ngram + weights.weighted_ngram;
            if s <= 0.0 {
                return Err(MetricError::Weights("reference does not parse and n-gram weights are zero".into()));
            }
            CodeBleuWeights { ngram: weights.ngram / s, weighted_ngram: weights.weighted_ngram / s, ast: 0.0, dataflow: 0.0 }
        }
    };
    let (ast, df) = structural.unzip();
    let total = effective.ngram * ngram
        + effective.weighted_ngram * weighted_ngram
        + effective.ast * ast.unwrap_or(0.0)
        + effective.dataflow * df.unwrap_or(0.0);
    Ok(CodeBleuScore { codebleu: total, ngram, weighted_ngram, ast_match: ast, dataflow_match: df, weights: effective })
}
