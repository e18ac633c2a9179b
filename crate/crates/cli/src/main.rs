mod cmd;
mod io;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::io::{Session, UsageError};

#[derive(Parser, Debug)]
#[command(name = "forge", version, about = "Corpus preparation, noising, training orchestration and evaluation for C++/CUDA/Fortran translation")]
struct Cli {
    /// Seed for every random draw (default 0; a plan's own seed for `train`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with stage settings ([noise], [corpus], [tokenizer], [metrics]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train and apply the BPE tokenizer.
    #[command(subcommand)]
    Tok(cmd::tok::TokCommand),
    /// Build per-language keyword and frequency profiles.
    #[command(subcommand)]
    Profile(cmd::profile::ProfileCommand),
    /// Emit AST entity labels.
    #[command(subcommand)]
    Aer(cmd::aer::AerCommand),
    /// Corrupt tokenized documents into training examples.
    #[command(subcommand)]
    Noise(cmd::noise::NoiseCommand),
    /// Filter, balance, label and describe corpora.
    #[command(subcommand)]
    Corpus(cmd::corpus::CorpusCommand),
    /// Run a training schedule against a translator.
    Train(cmd::train::TrainArgs),
    /// Score hypotheses against references.
    Score(cmd::score::ScoreArgs),
    /// Measure compilation accuracy, optionally with automatic repair.
    Compile(cmd::compile::CompileArgs),
}

fn init_logging(level: &str) -> Result<(), UsageError> {
    let filter = tracing_subscriber::EnvFilter::try_new(level).map_err(|e| UsageError(format!("--log-level {level}: {e}")))?;
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .without_time()
        .init();
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_logging(&cli.log_level)?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(UsageError("--jobs must be >= 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().ok();
    }
    let session = Session::new(cli.seed, cli.config.as_deref(), cli.jobs)?;
    match cli.command {
        Command::Tok(c) => cmd::tok::run(c, &session),
        Command::Profile(c) => cmd::profile::run(c, &session),
        Command::Aer(c) => cmd::aer::run(c, &session),
        Command::Noise(c) => cmd::noise::run(c, &session),
        Command::Corpus(c) => cmd::corpus::run(c, &session),
        Command::Train(a) => cmd::train::run(a, &session),
        Command::Score(a) => cmd::score::run(a, &session),
        Command::Compile(a) => cmd::compile::run(a, &session),
    }
}

/// 2 usage, 3 data, 4 external tool.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<forge_core::Error>() {
            return if e.is_external() { 4 } else { 3 };
        }
        if cause.downcast_ref::<io::ExternalError>().is_some() {
            return 4;
        }
    }
    3
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<serde_json::Error>().and_then(|e| e.io_error_kind()) == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            let report = serde_json::json!({ "error": format!("{e:#}"), "exit_code": code });
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}
