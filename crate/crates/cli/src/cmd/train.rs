use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use forge_core::aer::AerTagSet;
use forge_core::orchestrator::{run_plan, ExternalTranslator, PlanInputs, SchedulePlan, StubDictionary, StubIdentity, TranslatorPort};
use forge_core::profiles::load_profile_dir;
use forge_core::{Language, TokenizedDocument, Vocabulary};

use super::{gather, load_vocab};
use crate::io::{core, read_file, read_json_lines, usage, ExternalError, Session, Sink};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Schedule plan (TOML).
    #[arg(long)]
    plan: PathBuf,
    /// stub-identity, stub-dict:FILE or external:COMMAND.
    #[arg(long, default_value = "stub-identity")]
    translator: String,
    /// Vocabulary from `forge tok train`.
    #[arg(long)]
    vocab: PathBuf,
    /// Directory of `<lang>.profile` files; needed for DAE+BT phases.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// AER tag table for the AER phase.
    #[arg(long, conflicts_with = "cuda_extended")]
    tags: Option<PathBuf>,
    #[arg(long)]
    cuda_extended: bool,
    /// Parallel data for finetuning: JSONL `{source, target, src_lang, tgt_lang}`.
    #[arg(long)]
    parallel: Option<PathBuf>,
    /// Write every training batch's examples here as JSONL.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Run report (JSON); stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Monolingual corpora: directories, JSONL or source files.
    #[arg(required = true)]
    corpus: Vec<PathBuf>,
}

#[derive(Deserialize)]
struct ParallelLine {
    #[serde(default)]
    id: String,
    src_lang: Language,
    tgt_lang: Language,
    source: String,
    target: String,
}

fn translator(spec: &str, vocab: &Vocabulary) -> anyhow::Result<Box<dyn TranslatorPort>> {
    if spec == "stub-identity" {
        return Ok(Box::new(StubIdentity::default()));
    }
    if let Some(file) = spec.strip_prefix("stub-dict:") {
        let text = read_file(Path::new(file))?;
        let d = StubDictionary::from_text(&text, vocab.clone()).map_err(|e| usage(format!("{file}: {e}")))?;
        return Ok(Box::new(d));
    }
    if let Some(cmd) = spec.strip_prefix("external:") {
        let t = ExternalTranslator::spawn(cmd).map_err(|e| ExternalError(e.to_string()))?;
        return Ok(Box::new(t));
    }
    Err(usage(format!("unknown translator `{spec}`; expected stub-identity, stub-dict:FILE or external:CMD")))
}

pub fn run(a: TrainArgs, s: &Session) -> anyhow::Result<()> {
    let mut plan = SchedulePlan::load(&a.plan).map_err(|e| usage(e.to_string()))?;
    if let Some(seed) = s.explicit_seed {
        plan.seed = seed;
    }
    let vocab = load_vocab(&a.vocab)?;
    let profiles = match &a.profiles {
        Some(p) => load_profile_dir(p).map_err(core)?,
        None => Default::default(),
    };
    let tagset = match (&a.tags, a.cuda_extended) {
        (Some(p), _) => AerTagSet::load(p).map_err(core)?,
        (None, true) => AerTagSet::cuda_extended(),
        (None, false) => AerTagSet::default(),
    };
    let mut corpora: BTreeMap<Language, Vec<TokenizedDocument>> = BTreeMap::new();
    for d in gather(&a.corpus, None, None)? {
        corpora.entry(d.language).or_default().push(vocab.encode(&d.text, d.language).with_id(d.doc_id));
    }
    let parallel = match &a.parallel {
        Some(p) => read_json_lines::<ParallelLine>(p)?
            .into_iter()
            .map(|l| {
                (
                    vocab.encode(&l.source, l.src_lang).with_id(l.id.clone()),
                    vocab.encode(&l.target, l.tgt_lang).with_id(l.id),
                )
            })
            .collect(),
        None => Vec::new(),
    };
    let mut t = translator(&a.translator, &vocab)?;
    let inputs = PlanInputs { vocab: &vocab, profiles: &profiles, tagset, corpora, parallel };

    let mut emit = a.emit.as_deref().map(|p| Sink::open(Some(p))).transpose()?;
    let mut emit_err = None;
    let report = run_plan(&plan, &inputs, t.as_mut(), &mut |batch| {
        if let Some(sink) = emit.as_mut() {
            for ex in batch {
                if let Err(e) = sink.line(ex) {
                    emit_err.get_or_insert(e);
                }
            }
        }
    })
    .map_err(core)?;
    if let Some(e) = emit_err {
        return Err(e);
    }
    let mut outputs = Vec::new();
    if let Some(sink) = emit {
        outputs.extend(sink.close()?);
    }
    let mut sink = Sink::open(a.report.as_deref())?;
    sink.pretty(&report)?;
    outputs.extend(sink.close()?);

    let mut ins: Vec<&Path> = a.corpus.iter().map(PathBuf::as_path).collect();
    ins.extend([a.plan.as_path(), a.vocab.as_path()]);
    ins.extend(a.profiles.as_deref());
    ins.extend(a.tags.as_deref());
    ins.extend(a.parallel.as_deref());
    let outs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    if !outs.is_empty() {
        s.finish_seeded(plan.seed, &ins, &outs)?;
    }
    Ok(())
}
