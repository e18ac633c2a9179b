use std::path::PathBuf;

use clap::Subcommand;

use forge_core::aer::{AerLabeler, AerRecord, AerTagSet};
use forge_core::Language;

use super::{gather, load_vocab};
use crate::io::{core, usage, Session, Sink};

#[derive(Subcommand, Debug)]
pub enum AerCommand {
    /// Emit `{doc_id, language, tokens, labels}` per parsable document.
    Label {
        #[arg(long)]
        lang: Language,
        #[arg(long)]
        vocab: PathBuf,
        /// Tag table (`<id> <name>` per line); the shipped table when omitted.
        #[arg(long, conflicts_with = "cuda_extended")]
        tags: Option<PathBuf>,
        /// Use the shipped table with the extra CUDA builtin category.
        #[arg(long)]
        cuda_extended: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

pub fn run(cmd: AerCommand, s: &Session) -> anyhow::Result<()> {
    let AerCommand::Label { lang, vocab, tags, cuda_extended, out, files } = cmd;
    let v = load_vocab(&vocab)?;
    let tagset = match (&tags, cuda_extended) {
        (Some(p), _) => AerTagSet::load(p).map_err(core)?,
        (None, true) => AerTagSet::cuda_extended(),
        (None, false) => AerTagSet::default(),
    };
    let docs = gather(&files, Some(lang), Some(lang))?;
    if docs.is_empty() {
        return Err(usage(format!("no {lang} documents found")));
    }
    let labeler = AerLabeler::new(lang, tagset);
    let mut sink = Sink::open(out.as_deref())?;
    let mut failed = 0;
    for d in &docs {
        match labeler.label(&d.text, &v) {
            Ok(mut labeled) => {
                labeled.doc.doc_id = d.doc_id.clone();
                sink.line(&AerRecord::from(&labeled))?;
            }
            Err(e) => {
                tracing::warn!(doc = %d.doc_id, "skipped: {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("aer: {failed} of {} documents could not be labeled", docs.len());
    }
    if let Some(p) = sink.close()? {
        let mut inputs: Vec<&std::path::Path> = files.iter().map(PathBuf::as_path).collect();
        inputs.push(&vocab);
        if let Some(t) = &tags {
            inputs.push(t);
        }
        s.finish(&inputs, &[&p])?;
    }
    Ok(())
}
