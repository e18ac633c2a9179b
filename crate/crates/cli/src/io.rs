use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use forge_core::manifest::RunManifest;
use forge_core::metrics::CodeBleuWeights;
use forge_core::noise::NoiseConfig;

/// Bad invocation; exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Failure of a tool the pipeline drives; exit code 4.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ExternalError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Lift a stage error into the crate error so the exit code can be derived.
pub fn core<E: Into<forge_core::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(e.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSettings {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for CorpusSettings {
    fn default() -> Self {
        Self { min_tokens: 10, max_tokens: 1000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerSettings {
    pub vocab_size: usize,
}

impl Default for TokenizerSettings {
    fn default() -> Self {
        Self { vocab_size: forge_core::tokenizer::DEFAULT_VOCAB_SIZE }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSettings {
    pub weights: CodeBleuWeights,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForgeConfig {
    pub noise: NoiseConfig,
    pub corpus: CorpusSettings,
    pub tokenizer: TokenizerSettings,
    pub metrics: MetricSettings,
}

/// A full config, or a bare noise table as accepted by `noise dae`.
fn parse_config(text: &str) -> Result<ForgeConfig, toml::de::Error> {
    toml::from_str(text).or_else(|full| {
        toml::from_str::<NoiseConfig>(text).map(|noise| ForgeConfig { noise, ..Default::default() }).map_err(|_| full)
    })
}

pub struct Session {
    pub seed: u64,
    /// The seed when given on the command line.
    pub explicit_seed: Option<u64>,
    pub config: ForgeConfig,
    config_path: Option<PathBuf>,
    pub jobs: usize,
    started: Instant,
}

impl Session {
    pub fn new(seed: Option<u64>, config: Option<&Path>, jobs: Option<usize>) -> anyhow::Result<Self> {
        let cfg = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| usage(format!("--config {}: {e}", p.display())))?;
                parse_config(&text).map_err(|e| usage(format!("--config {}: {e}", p.display())))?
            }
            None => ForgeConfig::default(),
        };
        let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        Ok(Self { seed: seed.unwrap_or(0), explicit_seed: seed, config: cfg, config_path: config.map(Path::to_path_buf), jobs, started: Instant::now() })
    }

    fn manifest(&self, seed: u64) -> anyhow::Result<RunManifest> {
        let mut m = RunManifest::new(std::env::args().skip(1).collect(), seed);
        if let Some(p) = &self.config_path {
            m.config(p).map_err(core)?;
        }
        Ok(m)
    }

    /// Record inputs and outputs and write the manifest beside every file output.
    pub fn finish(&self, inputs: &[&Path], outputs: &[&Path]) -> anyhow::Result<()> {
        self.finish_seeded(self.seed, inputs, outputs)
    }

    /// As `finish`, for stages whose effective seed comes from elsewhere.
    pub fn finish_seeded(&self, seed: u64, inputs: &[&Path], outputs: &[&Path]) -> anyhow::Result<()> {
        let mut m = self.manifest(seed)?;
        for p in inputs.iter().filter(|p| p.exists()) {
            m.input(p).map_err(core)?;
        }
        for p in outputs {
            m.output(p).map_err(core)?;
        }
        m.wall_time_ms = self.started.elapsed().as_millis() as u64;
        for p in outputs {
            m.write(&RunManifest::location_for(p)).map_err(core)?;
        }
        Ok(())
    }
}

/// Where a command writes its main output.
pub enum Sink {
    File(PathBuf, BufWriter<File>),
    Stdout(std::io::StdoutLock<'static>),
}

impl Sink {
    pub fn open(path: Option<&Path>) -> anyhow::Result<Self> {
        Ok(match path {
            Some(p) => {
                let f = File::create(p).map_err(|e| core(forge_core::Error::io(p, e)))?;
                Sink::File(p.to_path_buf(), BufWriter::new(f))
            }
            None => Sink::Stdout(std::io::stdout().lock()),
        })
    }

    pub fn line<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        serde_json::to_writer(&mut *self, value)?;
        self.write_all(b"\n")?;
        Ok(())
    }

    pub fn pretty<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut *self, value)?;
        self.write_all(b"\n")?;
        Ok(())
    }

    /// Flush and return the file path, if any.
    pub fn close(mut self) -> anyhow::Result<Option<PathBuf>> {
        self.flush()?;
        Ok(match self {
            Sink::File(p, _) => Some(p),
            Sink::Stdout(_) => None,
        })
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self {
            Sink::File(_, w) => w.write(buf),
            Sink::Stdout(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self {
            Sink::File(_, w) => w.flush(),
            Sink::Stdout(w) => w.flush(),
        }
    }
}

/// Parse every non-blank line of a JSONL file (or stdin for `-`).
pub fn read_json_lines<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let reader: Box<dyn BufRead> = if path.as_os_str() == "-" {
        Box::new(BufReader::new(std::io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(path).map_err(|e| core(forge_core::Error::io(path, e)))?))
    };
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| path.display().to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| {
            core(forge_core::Error::Data(format!("{}:{}: {e}", path.display(), i + 1)))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_file(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, contents).map_err(|e| core(forge_core::Error::io(path, e)))
}

pub fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| core(forge_core::Error::io(path, e)))
}
