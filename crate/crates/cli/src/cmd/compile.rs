use std::path::PathBuf;

use clap::Args;

use forge_core::compile::{compilation_accuracy, CompilerAdapter};
use forge_core::Language;

use super::gather;
use crate::io::{core, usage, ExternalError, Session, Sink};

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[arg(long)]
    lang: Language,
    /// Builtin adapter name (nvcc, cuda-shim, g++, gfortran) or adapter JSON file.
    /// Defaults to the language's usual compiler; CUDA falls back to cuda-shim
    /// when nvcc is not installed.
    #[arg(long)]
    adapter: Option<String>,
    /// Classify failures and apply repair rules before recompiling.
    #[arg(long)]
    repair: bool,
    /// Per-file compiler timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Accuracy report (JSON); stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Source directory, JSONL corpus or files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn runnable(adapter: &CompilerAdapter) -> bool {
    std::process::Command::new(adapter.executable())
        .arg("--version")
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .is_ok()
}

fn pick_adapter(a: &CompileArgs) -> anyhow::Result<CompilerAdapter> {
    let adapter = match &a.adapter {
        Some(spec) => CompilerAdapter::resolve(spec).map_err(|e| usage(e.to_string()))?,
        None => {
            let default = CompilerAdapter::default_for(a.lang);
            if a.lang == Language::Cuda && !runnable(&default) {
                tracing::warn!("{} not found; using the cuda-shim adapter", default.executable());
                CompilerAdapter::builtin("cuda-shim").expect("builtin exists")
            } else {
                default
            }
        }
    };
    if adapter.language != a.lang {
        return Err(usage(format!("adapter {} compiles {}, not {}", adapter.name, adapter.language, a.lang)));
    }
    Ok(match a.timeout {
        Some(t) => adapter.with_timeout(t),
        None => adapter,
    })
}

pub fn run(a: CompileArgs, s: &Session) -> anyhow::Result<()> {
    let adapter = pick_adapter(&a)?;
    if !runnable(&adapter) {
        return Err(ExternalError(format!("compiler `{}` is not installed", adapter.executable())).into());
    }
    let docs = gather(&a.inputs, Some(a.lang), Some(a.lang))?;
    let sources: Vec<(String, String)> = docs.into_iter().map(|d| (d.doc_id, d.text)).collect();
    let report = compilation_accuracy(&sources, &adapter, a.repair, s.jobs).map_err(core)?;
    eprintln!(
        "compile: {}/{} compiled ({:.2}%), {} before repair",
        report.compiled, report.total, report.accuracy, report.compiled_before_repair
    );
    let mut sink = Sink::open(a.report.as_deref())?;
    sink.pretty(&report)?;
    if let Some(p) = sink.close()? {
        let ins: Vec<&std::path::Path> = a.inputs.iter().map(PathBuf::as_path).collect();
        s.finish(&ins, &[&p])?;
    }
    if report.total > 0 && report.tool_errors() == report.total {
        return Err(ExternalError("every compilation failed inside the compiler adapter".into()).into());
    }
    Ok(())
}
