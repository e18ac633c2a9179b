use std::path::PathBuf;

use clap::Subcommand;

use forge_core::profiles::build_profile;
use forge_core::Language;

use super::{gather, load_keywords, load_vocab};
use crate::io::{core, usage, Session};

#[derive(Subcommand, Debug)]
pub enum ProfileCommand {
    /// Count surface-word frequencies of one language and store its keyword set.
    Build {
        #[arg(long)]
        lang: Language,
        /// Keyword list, one per line; the shipped list when omitted.
        #[arg(long)]
        keywords: Option<PathBuf>,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        corpus: Vec<PathBuf>,
    },
}

pub fn run(cmd: ProfileCommand, s: &Session) -> anyhow::Result<()> {
    let ProfileCommand::Build { lang, keywords, vocab, out, corpus } = cmd;
    let v = load_vocab(&vocab)?;
    let kw = load_keywords(keywords.as_deref(), lang)?;
    let docs = gather(&corpus, Some(lang), Some(lang))?;
    if docs.is_empty() {
        return Err(usage(format!("no {lang} documents found")));
    }
    let tokenized: Vec<_> = docs.iter().map(|d| v.encode(&d.text, d.language).with_id(d.doc_id.clone())).collect();
    let profile = build_profile(&tokenized, lang, &kw, &v).map_err(core)?;
    profile.save(&out).map_err(|e| core(forge_core::Error::io(&out, e)))?;
    let mut inputs: Vec<&std::path::Path> = corpus.iter().map(PathBuf::as_path).collect();
    inputs.push(&vocab);
    if let Some(k) = &keywords {
        inputs.push(k);
    }
    s.finish(&inputs, &[&out])
}
