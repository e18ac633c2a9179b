use std::path::PathBuf;

use clap::Subcommand;
use serde::{Deserialize, Serialize};

use forge_core::tokenizer::{train_bpe, SpecialRole};
use forge_core::Language;

use super::{gather, load_vocab};
use crate::io::{core, read_json_lines, usage, Session, Sink};

#[derive(Subcommand, Debug)]
pub enum TokCommand {
    /// Train a vocabulary on source files, directories or JSONL corpora.
    Train {
        #[arg(long)]
        vocab_size: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Language of plain files whose extension is not recognized.
        #[arg(long)]
        lang: Option<Language>,
        #[arg(required = true)]
        corpus: Vec<PathBuf>,
    },
    /// Encode documents to JSONL `{doc_id, language, tokens, word_spans}`.
    Encode {
        #[arg(long)]
        vocab: PathBuf,
        /// Only documents of this language; also the language of unrecognized files.
        #[arg(long)]
        lang: Option<Language>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Decode JSONL lines carrying `tokens` back to `{doc_id, text}`.
    Decode {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        input: PathBuf,
    },
}

#[derive(Deserialize)]
struct TokenLine {
    #[serde(default)]
    doc_id: String,
    tokens: Vec<u32>,
}

#[derive(Serialize)]
struct TextLine {
    doc_id: String,
    text: String,
}

pub fn run(cmd: TokCommand, s: &Session) -> anyhow::Result<()> {
    match cmd {
        TokCommand::Train { vocab_size, out, lang, corpus } => {
            let docs = gather(&corpus, None, lang)?;
            if docs.is_empty() {
                return Err(usage("no documents found in the given corpus paths"));
            }
            let size = vocab_size.unwrap_or(s.config.tokenizer.vocab_size);
            let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
            let vocab = train_bpe(&texts, size, &SpecialRole::defaults()).map_err(core)?;
            vocab.save(&out).map_err(|e| core(forge_core::Error::io(&out, e)))?;
            tracing::info!(docs = docs.len(), size = vocab.len(), "vocabulary trained");
            let inputs: Vec<&std::path::Path> = corpus.iter().map(PathBuf::as_path).collect();
            s.finish(&inputs, &[&out])
        }
        TokCommand::Encode { vocab, lang, out, inputs } => {
            let v = load_vocab(&vocab)?;
            let docs = gather(&inputs, lang, lang)?;
            let mut sink = Sink::open(out.as_deref())?;
            for d in &docs {
                sink.line(&v.encode(&d.text, d.language).with_id(d.doc_id.clone()))?;
            }
            if let Some(p) = sink.close()? {
                let mut ins: Vec<&std::path::Path> = inputs.iter().map(PathBuf::as_path).collect();
                ins.push(&vocab);
                s.finish(&ins, &[&p])?;
            }
            Ok(())
        }
        TokCommand::Decode { vocab, out, input } => {
            let v = load_vocab(&vocab)?;
            let mut sink = Sink::open(out.as_deref())?;
            for l in read_json_lines::<TokenLine>(&input)? {
                sink.line(&TextLine { doc_id: l.doc_id, text: v.decode(&l.tokens).map_err(core)? })?;
            }
            if let Some(p) = sink.close()? {
                s.finish(&[&input, &vocab], &[&p])?;
            }
            Ok(())
        }
    }
}
