use std::path::PathBuf;

use clap::Subcommand;

use forge_core::noise::{corrupt_mlm, DaeNoiser, NoiseConfig};
use forge_core::profiles::load_profile_dir;
use forge_core::rng::{domain, stream};

use super::{load_vocab, tokenized_input};
use crate::io::{core, usage, Session, Sink};

#[derive(Subcommand, Debug)]
pub enum NoiseCommand {
    /// Denoising examples: drop, mask, insert, shuffle, then prepend the language token.
    Dae {
        #[arg(long, default_value_t = 0)]
        epoch: u32,
        #[arg(long)]
        vocab: PathBuf,
        /// Directory of `<lang>.profile` files.
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// JSONL of tokenized (or raw) documents.
        input: PathBuf,
    },
    /// Whole-word masked language modelling examples.
    Mlm {
        #[arg(long, default_value_t = 0)]
        epoch: u32,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        mask_ratio: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        input: PathBuf,
    },
}

fn noise_config(s: &Session) -> anyhow::Result<NoiseConfig> {
    let cfg = NoiseConfig { seed: s.seed, ..s.config.noise.clone() };
    cfg.validate().map_err(core)?;
    Ok(cfg)
}

pub fn run(cmd: NoiseCommand, s: &Session) -> anyhow::Result<()> {
    match cmd {
        NoiseCommand::Dae { epoch, vocab, profiles, out, input } => {
            let v = load_vocab(&vocab)?;
            let cfg = noise_config(s)?;
            let set = load_profile_dir(&profiles).map_err(core)?;
            if set.is_empty() {
                return Err(usage(format!("{}: no <lang>.profile files", profiles.display())));
            }
            let noiser = DaeNoiser::new(&v, &set, cfg).map_err(core)?;
            let docs = tokenized_input(&input, &v)?;
            let mut sink = Sink::open(out.as_deref())?;
            for (i, d) in docs.iter().enumerate() {
                let mut rng = stream(s.seed, &[domain::DAE, epoch as u64, i as u64]);
                sink.line(&noiser.corrupt(d, epoch, &mut rng).map_err(core)?.0)?;
            }
            if let Some(p) = sink.close()? {
                s.finish(&[&input, &vocab, &profiles], &[&p])?;
            }
            Ok(())
        }
        NoiseCommand::Mlm { epoch, vocab, mask_ratio, out, input } => {
            let v = load_vocab(&vocab)?;
            let ratio = mask_ratio.unwrap_or(s.config.noise.mask_ratio);
            if !(0.0..=1.0).contains(&ratio) {
                return Err(usage(format!("--mask-ratio {ratio} is outside [0, 1]")));
            }
            let docs = tokenized_input(&input, &v)?;
            let mut sink = Sink::open(out.as_deref())?;
            for (i, d) in docs.iter().enumerate() {
                let mut rng = stream(s.seed, &[domain::MLM, epoch as u64, i as u64]);
                sink.line(&corrupt_mlm(d, &v, ratio, epoch, &mut rng).map_err(core)?.0)?;
            }
            if let Some(p) = sink.close()? {
                s.finish(&[&input, &vocab], &[&p])?;
            }
            Ok(())
        }
    }
}
