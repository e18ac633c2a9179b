pub mod aer;
pub mod compile;
pub mod corpus;
pub mod noise;
pub mod profile;
pub mod score;
pub mod tok;
pub mod train;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use forge_core::corpus::{read_dir, read_jsonl, Document};
use forge_core::lang::parse_keyword_list;
use forge_core::{Language, TokenizedDocument, Vocabulary};

use crate::io::{core, read_file, read_json_lines, usage};

/// Documents from directories, JSONL files or single source files.
///
/// A single file's language comes from its extension, else from `fallback`.
pub fn gather(paths: &[PathBuf], only: Option<Language>, fallback: Option<Language>) -> anyhow::Result<Vec<Document>> {
    let mut docs = Vec::new();
    for p in paths {
        if p.is_dir() {
            docs.extend(read_dir(p, only).map_err(core)?);
        } else if p.extension().is_some_and(|e| e == "jsonl") {
            docs.extend(read_jsonl(p).map_err(core)?.into_iter().filter(|d| only.is_none_or(|o| d.language == o)));
        } else {
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
            let lang = Language::ALL
                .into_iter()
                .find(|l| l.file_extensions().contains(&ext.as_str()))
                .or(fallback)
                .ok_or_else(|| usage(format!("{}: cannot tell the language; pass --lang", p.display())))?;
            if only.is_none_or(|o| o == lang) {
                docs.push(Document { doc_id: p.display().to_string(), language: lang, text: read_file(p)? });
            }
        }
    }
    Ok(docs)
}

pub fn load_vocab(path: &Path) -> anyhow::Result<Vocabulary> {
    Vocabulary::load(path).map_err(core)
}

/// Keywords from a file, one per line, else the shipped list.
pub fn load_keywords(path: Option<&Path>, lang: Language) -> anyhow::Result<BTreeSet<String>> {
    match path {
        Some(p) => Ok(parse_keyword_list(&read_file(p)?)),
        None => Ok(lang.default_keywords()),
    }
}

/// A JSONL line that is either already tokenized or raw text.
#[derive(serde::Deserialize)]
#[serde(untagged)]
enum DocLine {
    Tokenized(TokenizedDocument),
    Raw(Document),
}

/// Tokenized documents from JSONL, encoding raw `{doc_id, language, text}` lines with `vocab`.
pub fn tokenized_input(path: &Path, vocab: &Vocabulary) -> anyhow::Result<Vec<TokenizedDocument>> {
    Ok(read_json_lines::<DocLine>(path)?
        .into_iter()
        .map(|l| match l {
            DocLine::Tokenized(d) => d,
            DocLine::Raw(d) => vocab.encode(&d.text, d.language).with_id(d.doc_id),
        })
        .collect())
}
