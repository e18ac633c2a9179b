use std::path::PathBuf;

use clap::Args;

use forge_core::metrics::{corpus_report, CodeBleuWeights, ReportOptions, ScorePair};
use forge_core::Language;

use super::load_keywords;
use crate::io::{core, read_json_lines, usage, Session, Sink};

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Language of pairs that do not name one.
    #[arg(long)]
    lang: Language,
    /// CodeBLEU weights `ngram,weighted,ast,dataflow`.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Keyword list for the weighted n-gram component.
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// JSONL `{id, hypothesis, reference, language}`.
    pairs: PathBuf,
}

pub fn run(a: ScoreArgs, s: &Session) -> anyhow::Result<()> {
    let pairs: Vec<ScorePair> = read_json_lines(&a.pairs)?;
    if pairs.is_empty() {
        return Err(usage(format!("{}: no pairs", a.pairs.display())));
    }
    let mut opts = ReportOptions::new(a.lang);
    opts.weights = match &a.weights {
        Some(w) => match w[..] {
            [ngram, weighted_ngram, ast, dataflow] => CodeBleuWeights { ngram, weighted_ngram, ast, dataflow },
            _ => return Err(usage(format!("--weights takes 4 values, got {}", w.len()))),
        },
        None => s.config.metrics.weights,
    };
    opts.weights.validate().map_err(|e| usage(e.to_string()))?;
    if a.keywords.is_some() {
        opts.keywords = Some(load_keywords(a.keywords.as_deref(), a.lang)?);
    }
    let report = corpus_report(&pairs, &opts).map_err(core)?;
    let mut sink = Sink::open(a.out.as_deref())?;
    sink.pretty(&report)?;
    if let Some(p) = sink.close()? {
        let mut ins = vec![a.pairs.as_path()];
        ins.extend(a.keywords.as_deref());
        s.finish(&ins, &[&p])?;
    }
    Ok(())
}
