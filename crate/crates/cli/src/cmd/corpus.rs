use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde::{Deserialize, Serialize};

use forge_core::corpus::{
    balance, filter_keywords, filter_length, filter_synthetic_pairs, quality_filter, write_jsonl, CommandLabeler, CorpusStats,
    Document, HttpLabeler, LabelCache, Labeler, QualityOptions, TokenCount, NATURAL_TEXT_THRESHOLD,
};
use forge_core::rng::{domain, stream};
use forge_core::{Language, Vocabulary};

use super::{gather, load_keywords, load_vocab};
use crate::io::{core, read_json_lines, usage, write_file, ExternalError, Session, Sink};

#[derive(Subcommand, Debug)]
pub enum CorpusCommand {
    /// Keep documents with a target-language keyword and a length within bounds.
    Filter {
        #[arg(long)]
        lang: Language,
        /// Keyword list; the shipped list for `--lang` when omitted.
        #[arg(long)]
        keywords: Option<PathBuf>,
        /// Skip the keyword filter.
        #[arg(long)]
        no_keyword_filter: bool,
        #[arg(long)]
        min_tokens: Option<usize>,
        #[arg(long)]
        max_tokens: Option<usize>,
        /// Count length in subword tokens of this vocabulary instead of words.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Stage statistics as JSON; printed to stderr when omitted.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Down-sample the larger of two corpora to the size of the smaller.
    Balance {
        #[arg(long)]
        out_a: PathBuf,
        #[arg(long)]
        out_b: PathBuf,
        a: PathBuf,
        b: PathBuf,
    },
    /// Keep documents an LLM or classifier judges educational.
    Quality {
        /// Append-only JSONL label cache; created if missing.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Local classifier command (code on stdin, yes/no on stdout).
        /// Without it the HTTP endpoint from FORGE_LABELER_URL is used, if set.
        #[arg(long)]
        labeler_cmd: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_in_flight: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Per-language file counts, token totals and length histograms.
    Stats {
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Drop empty, keyword-free or prose candidates from `{source, candidate}` JSONL.
    Synthetic {
        /// Language of the candidates.
        #[arg(long)]
        lang: Language,
        #[arg(long)]
        keywords: Option<PathBuf>,
        #[arg(long, default_value_t = NATURAL_TEXT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
        input: PathBuf,
    },
}

#[derive(Serialize, Deserialize)]
struct SyntheticPair {
    source: String,
    candidate: String,
}

fn paths(v: &[PathBuf]) -> Vec<&Path> {
    v.iter().map(PathBuf::as_path).collect()
}

fn counter(vocab: &Option<Vocabulary>) -> TokenCount<'_> {
    vocab.as_ref().map_or(TokenCount::Words, TokenCount::Bpe)
}

fn write_docs(docs: &[Document], out: &Path) -> anyhow::Result<()> {
    write_jsonl(docs, out).map_err(core)
}

pub fn run(cmd: CorpusCommand, s: &Session) -> anyhow::Result<()> {
    match cmd {
        CorpusCommand::Filter { lang, keywords, no_keyword_filter, min_tokens, max_tokens, vocab, out, stats, inputs } => {
            let v = vocab.as_deref().map(load_vocab).transpose()?;
            let mut docs = gather(&inputs, None, None)?;
            let mut report = CorpusStats::default();
            if !no_keyword_filter {
                let kw = load_keywords(keywords.as_deref(), lang)?;
                let (kept, st) = filter_keywords(docs, lang, &kw).map_err(core)?;
                report.push(st);
                docs = kept;
            }
            let min = min_tokens.unwrap_or(s.config.corpus.min_tokens);
            let max = max_tokens.unwrap_or(s.config.corpus.max_tokens);
            let (docs, st) = filter_length(docs, min, max, counter(&v)).map_err(core)?;
            report.push(st);
            report.languages = CorpusStats::summarize(&docs, counter(&v));
            write_docs(&docs, &out)?;
            let mut buf = Vec::new();
            report.write(&mut buf)?;
            let mut outputs = vec![out.as_path()];
            match &stats {
                Some(p) => {
                    write_file(p, &buf)?;
                    outputs.push(p);
                }
                None => eprint!("{}", String::from_utf8_lossy(&buf)),
            }
            let mut ins = paths(&inputs);
            ins.extend(keywords.as_deref());
            ins.extend(vocab.as_deref());
            s.finish(&ins, &outputs)
        }
        CorpusCommand::Balance { out_a, out_b, a, b } => {
            let da = gather(std::slice::from_ref(&a), None, None)?;
            let db = gather(std::slice::from_ref(&b), None, None)?;
            let mut rng = stream(s.seed, &[domain::BALANCE]);
            let (ba, bb) = balance(da, db, &mut rng).map_err(core)?;
            write_docs(&ba, &out_a)?;
            write_docs(&bb, &out_b)?;
            eprintln!("balance: kept {} documents per side", ba.len());
            s.finish(&[&a, &b], &[&out_a, &out_b])
        }
        CorpusCommand::Quality { cache, labeler_cmd, max_in_flight, out, inputs } => {
            let docs = gather(&inputs, None, None)?;
            let labeler: Option<Box<dyn Labeler>> = match &labeler_cmd {
                Some(cmd) => {
                    let mut parts = cmd.split_whitespace().map(str::to_string);
                    let program = parts.next().ok_or_else(|| usage("--labeler-cmd is empty"))?;
                    Some(Box::new(CommandLabeler { program: program.into(), args: parts.collect() }))
                }
                None => HttpLabeler::from_env().map(|h| Box::new(h) as Box<dyn Labeler>),
            };
            let mut cache = cache.as_deref().map(LabelCache::open).transpose().map_err(core)?;
            let opts = QualityOptions { max_in_flight, ..Default::default() };
            let outcome = quality_filter(docs, labeler.as_deref(), cache.as_mut(), &opts).map_err(core)?;
            write_docs(&outcome.retained, &out)?;
            for (id, resp) in &outcome.malformed {
                tracing::warn!(doc = %id, "unrecognized verdict {resp:?}");
            }
            eprintln!(
                "quality: kept {} of {}; {} malformed, {} unlabeled",
                outcome.stats.total.retained,
                outcome.stats.total.input,
                outcome.malformed.len(),
                outcome.unlabeled.len()
            );
            s.finish(&paths(&inputs), &[&out])?;
            if labeler.is_some() && outcome.stats.total.input > 0 && outcome.labels.is_empty() && outcome.malformed.is_empty() {
                return Err(ExternalError("the labeler produced no verdicts".into()).into());
            }
            Ok(())
        }
        CorpusCommand::Stats { vocab, out, inputs } => {
            let v = vocab.as_deref().map(load_vocab).transpose()?;
            let docs = gather(&inputs, None, None)?;
            let report = CorpusStats::describe(&docs, counter(&v));
            let mut sink = Sink::open(out.as_deref())?;
            sink.pretty(&report)?;
            if let Some(p) = sink.close()? {
                let mut ins = paths(&inputs);
                ins.extend(vocab.as_deref());
                s.finish(&ins, &[&p])?;
            }
            Ok(())
        }
        CorpusCommand::Synthetic { lang, keywords, threshold, out, input } => {
            let kw = load_keywords(keywords.as_deref(), lang)?;
            let pairs: Vec<(String, String)> =
                read_json_lines::<SyntheticPair>(&input)?.into_iter().map(|p| (p.source, p.candidate)).collect();
            let (kept, stats) = filter_synthetic_pairs(pairs, lang, &kw, threshold);
            let mut sink = Sink::open(Some(&out))?;
            for (source, candidate) in kept {
                sink.line(&SyntheticPair { source, candidate })?;
            }
            sink.close()?;
            eprintln!("{}", serde_json::to_string(&stats)?);
            s.finish(&[&input], &[&out])
        }
    }
}
