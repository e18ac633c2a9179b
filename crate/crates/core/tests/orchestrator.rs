use std::collections::BTreeMap;

use forge_core::aer::AerTagSet;
use forge_core::noise::{DaeNoiser, NoiseConfig};
use forge_core::orchestrator::{
    bt_round_trip, run_dae_bt_epoch, run_plan, EpochConfig, ExternalTranslator, OrchestratorError, PhaseKind, PlanInputs,
    SchedulePlan, StubDictionary, StubIdentity, TranslatorError, TranslatorPort,
};
use forge_core::profiles::{build_profile, ProfileSet};
use forge_core::tokenizer::{train_bpe, SpecialRole};
use forge_core::{Language, Objective, TokenizedDocument, TrainingExample, Vocabulary};

const CPP: &[&str] = &[
    "for (int i = 0; i < n; i++) y[i] = a * x[i] + y[i];",
    "int sum = 0; for (int i = 0; i < n; ++i) sum += v[i];",
    "void scale(float *x, int n) { for (int i = 0; i < n; i++) x[i] *= 2; }",
    "while (k > 0) { k--; }",
];
const CUDA: &[&str] = &[
    "__global__ void saxpy(float a, float *x, float *y) { int i = threadIdx.x; y[i] = a * x[i] + y[i]; }",
    "__global__ void zero(int *v) { v[blockIdx.x * blockDim.x + threadIdx.x] = 0; __syncthreads(); }",
    "int i = blockIdx.x * blockDim.x + threadIdx.x; if (i < n) out[i] = in[i];",
];

struct World {
    vocab: Vocabulary,
    profiles: ProfileSet,
}

fn world() -> World {
    let texts: Vec<&str> = CPP.iter().chain(CUDA).copied().collect();
    let vocab = train_bpe(&texts, 256 + 7 + 150, &SpecialRole::defaults()).unwrap();
    let enc = |lang: Language, src: &[&str]| src.iter().map(|s| vocab.encode(s, lang)).collect::<Vec<_>>();
    let cpp = build_profile(&enc(Language::Cpp, CPP), Language::Cpp, &Language::Cpp.default_keywords(), &vocab).unwrap();
    let cuda = build_profile(&enc(Language::Cuda, CUDA), Language::Cuda, &Language::Cuda.default_keywords(), &vocab).unwrap();
    World { profiles: ProfileSet::from([(Language::Cpp, cpp), (Language::Cuda, cuda)]), vocab }
}

fn corpus(v: &Vocabulary, lang: Language, src: &[&str], n: usize) -> Vec<TokenizedDocument> {
    (0..n).map(|i| v.encode(src[i % src.len()], lang).with_id(format!("{lang}/{i}"))).collect()
}

fn epoch_cfg(batch_size: usize) -> EpochConfig {
    EpochConfig { batch_size, ..EpochConfig::new(0, 11) }
}

#[test]
fn identity_round_trip_is_lang_token_plus_original() {
    let w = world();
    let docs = corpus(&w.vocab, Language::Cpp, CPP, 4);
    let rt = bt_round_trip(&docs, &StubIdentity::default(), Language::Cpp, Language::Cuda, 5, &w.vocab, 0).unwrap();
    assert_eq!(rt.failures, 0);
    let cuda = w.vocab.lang_id(Language::Cuda).unwrap();
    for (ex, doc) in rt.examples.iter().zip(&docs) {
        assert_eq!(ex.objective, Objective::Bt);
        assert_eq!(ex.input[0], cuda);
        assert_eq!(&ex.input[1..], &doc.tokens[..]);
        assert_eq!(ex.target, doc.tokens);
        assert_eq!((ex.src_lang, ex.tgt_lang), (Language::Cuda, Language::Cpp));
    }
}

#[test]
fn dictionary_round_trip_maps_inputs_and_keeps_targets() {
    let w = world();
    let dict = StubDictionary::from_text("cpp cuda for parallel_for\n", w.vocab.clone()).unwrap();
    let docs = corpus(&w.vocab, Language::Cpp, CPP, 3);
    let rt = bt_round_trip(&docs, &dict, Language::Cpp, Language::Cuda, 5, &w.vocab, 0).unwrap();
    for (ex, doc) in rt.examples.iter().zip(&docs) {
        let original = w.vocab.decode(&doc.tokens).unwrap();
        let expected = original.replace("for (", "parallel_for (");
        assert_eq!(w.vocab.decode(&ex.input[1..]).unwrap(), expected);
        assert_eq!(w.vocab.decode(&ex.target).unwrap(), original);
        if original.contains("for") {
            assert!(w.vocab.decode(&ex.input).unwrap().contains("parallel_for"));
            assert!(!w.vocab.decode(&ex.target).unwrap().contains("parallel_for"));
        }
    }
}

/// Rejects every document whose first token is even.
struct Picky;

impl TranslatorPort for Picky {
    fn translate(&self, tokens: &[u32], _: Language, _: Language, _: usize) -> Result<Vec<u32>, TranslatorError> {
        match tokens.first() {
            Some(t) if t % 2 == 0 => Err(TranslatorError::Rejected("even".into())),
            _ => Ok(tokens.to_vec()),
        }
    }
    fn train_step(&mut self, _: &[TrainingExample]) -> Result<f64, TranslatorError> {
        Ok(0.0)
    }
    fn init_decoder_from_encoder(&mut self) -> Result<(), TranslatorError> {
        Ok(())
    }
}

#[test]
fn per_document_failures_are_skipped_and_counted() {
    let w = world();
    let docs = corpus(&w.vocab, Language::Cpp, CPP, 4);
    let even = docs.iter().filter(|d| d.tokens[0] % 2 == 0).count();
    let rt = bt_round_trip(&docs, &Picky, Language::Cpp, Language::Cuda, 5, &w.vocab, 0).unwrap();
    assert_eq!(rt.failures, even);
    assert_eq!(rt.examples.len(), docs.len() - even);
}

#[test]
fn six_bt_batches_alternate_direction() {
    let w = world();
    let a = corpus(&w.vocab, Language::Cpp, CPP, 6);
    let b = corpus(&w.vocab, Language::Cuda, CUDA, 6);
    let noiser = DaeNoiser::new(&w.vocab, &w.profiles, NoiseConfig::default()).unwrap();
    let mut t = StubIdentity::default();
    let r = run_dae_bt_epoch((Language::Cpp, &a), (Language::Cuda, &b), &mut t, &noiser, &w.vocab, &epoch_cfg(2), &mut |_| {})
        .unwrap();
    let (c, u) = (Language::Cpp, Language::Cuda);
    assert_eq!(r.bt_directions, vec![(c, u), (u, c), (c, u), (u, c), (c, u), (u, c)]);
    assert_eq!((r.dae_batches, r.bt_batches), (6, 6));
    let expected: Vec<Objective> = (0..12).map(|i| if i % 2 == 0 { Objective::Dae } else { Objective::Bt }).collect();
    assert_eq!(r.schedule, expected);
}

#[test]
fn identity_epoch_reconstructs_everything() {
    let w = world();
    let a = corpus(&w.vocab, Language::Cpp, CPP, 9);
    let b = corpus(&w.vocab, Language::Cuda, CUDA, 5);
    let noiser = DaeNoiser::new(&w.vocab, &w.profiles, NoiseConfig::default()).unwrap();
    let mut t = StubIdentity::default();
    let r = run_dae_bt_epoch((Language::Cpp, &a), (Language::Cuda, &b), &mut t, &noiser, &w.vocab, &epoch_cfg(2), &mut |_| {})
        .unwrap();
    assert!(r.reconstruction_total > 0);
    assert_eq!(r.reconstruction_rate(), Some(100.0));
    assert!(r.dae_batches.abs_diff(r.bt_batches) <= 1);
    assert_eq!(r.dae_examples, 14);
    for step in &t.steps {
        assert!(step.objectives.windows(2).all(|p| p[0] == p[1]), "mixed batch {:?}", step.objectives);
    }
    // every BT target is a corpus document, never an intermediate
    let originals: Vec<&Vec<u32>> = a.iter().chain(&b).map(|d| &d.tokens).collect();
    for step in t.steps.iter().filter(|s| s.objectives[0] == Objective::Bt) {
        for target in &step.targets {
            assert!(originals.contains(&target));
        }
    }
}

#[test]
fn epochs_are_reproducible() {
    let w = world();
    let a = corpus(&w.vocab, Language::Cpp, CPP, 7);
    let b = corpus(&w.vocab, Language::Cuda, CUDA, 4);
    let noiser = DaeNoiser::new(&w.vocab, &w.profiles, NoiseConfig::default()).unwrap();
    let run = || {
        let mut t = StubIdentity::default();
        let mut seen = Vec::new();
        let r = run_dae_bt_epoch((Language::Cpp, &a), (Language::Cuda, &b), &mut t, &noiser, &w.vocab, &epoch_cfg(3), &mut |batch| {
            seen.extend(batch.iter().map(TrainingExample::to_json_line))
        })
        .unwrap();
        (r, seen)
    };
    assert_eq!(run(), run());
}

#[test]
fn empty_and_unpaired_corpora() {
    let w = world();
    let noiser = DaeNoiser::new(&w.vocab, &w.profiles, NoiseConfig::default()).unwrap();
    let mut t = StubIdentity::default();
    let r = run_dae_bt_epoch((Language::Cpp, &[]), (Language::Cuda, &[]), &mut t, &noiser, &w.vocab, &epoch_cfg(2), &mut |_| {})
        .unwrap();
    assert_eq!((r.dae_batches, r.bt_batches, r.mean_dae_loss), (0, 0, None));
    assert!(t.steps.is_empty());
    let a = corpus(&w.vocab, Language::Cpp, CPP, 2);
    let r = run_dae_bt_epoch((Language::Cpp, &a), (Language::Cuda, &[]), &mut t, &noiser, &w.vocab, &epoch_cfg(2), &mut |_| {});
    assert!(matches!(r, Err(OrchestratorError::UnpairedCorpus(Language::Cuda))));
}

fn fixture(name: &str) -> String {
    format!("python3 {}/tests/fixtures/translator/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn python_available() -> bool {
    std::process::Command::new("python3").arg("--version").output().is_ok()
}

#[test]
fn external_translator_speaks_json_lines() {
    if !python_available() {
        eprintln!("python3 not found, skipping");
        return;
    }
    let w = world();
    let mut t = ExternalTranslator::spawn(&fixture("identity.py")).unwrap();
    assert_eq!(t.translate(&[5, 6, 7], Language::Cpp, Language::Cuda, 5).unwrap(), vec![5, 6, 7]);
    let err = t.translate(&[1], Language::Cpp, Language::Cpp, 5).unwrap_err();
    assert!(err.is_per_document(), "{err}");
    t.init_decoder_from_encoder().unwrap();

    let a = corpus(&w.vocab, Language::Cpp, CPP, 4);
    let b = corpus(&w.vocab, Language::Cuda, CUDA, 4);
    let noiser = DaeNoiser::new(&w.vocab, &w.profiles, NoiseConfig::default()).unwrap();
    let r = run_dae_bt_epoch((Language::Cpp, &a), (Language::Cuda, &b), &mut t, &noiser, &w.vocab, &epoch_cfg(2), &mut |_| {})
        .unwrap();
    assert_eq!((r.dae_batches, r.bt_batches), (4, 4));
    assert_eq!(r.reconstruction_rate(), Some(100.0));
    assert_eq!(r.mean_dae_loss, Some((1.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0) / 4.0));
}

#[test]
fn external_translator_failures() {
    assert!(matches!(ExternalTranslator::spawn(""), Err(TranslatorError::Process(_))));
    assert!(matches!(ExternalTranslator::spawn("/nonexistent/translator"), Err(TranslatorError::Process(_))));
    if !python_available() {
        return;
    }
    let t = ExternalTranslator::spawn(&fixture("garbled.py")).unwrap();
    let err = t.translate(&[1], Language::Cpp, Language::Cuda, 5).unwrap_err();
    assert!(matches!(err, TranslatorError::Protocol(_)), "{err}");
    assert!(!err.is_per_document());
    let t = ExternalTranslator::spawn("true").unwrap();
    std::thread::sleep(std::time::Duration::from_millis(100));
    assert!(matches!(t.translate(&[1], Language::Cpp, Language::Cuda, 5), Err(TranslatorError::Process(_))));
}

const PLAN: &str = r#"
seed = 3
batch_size = 2
measure_reconstruction = true

[noise]
drop_ratio = 0.2

[[phase]]
kind = "mlm"
epochs = 2

[[phase]]
kind = "aer"
epochs = 1

[[phase]]
kind = "dae_bt"
epochs = 2

[[phase]]
kind = "finetune"
epochs = 1
"#;

#[test]
fn plan_runs_every_phase_in_order() {
    let w = world();
    let plan = SchedulePlan::from_toml(PLAN).unwrap();
    assert_eq!(plan.beam_size, 5);
    assert_eq!(plan.pairs, vec![(Language::Cpp, Language::Cuda)]);
    let corpora = BTreeMap::from([
        (Language::Cpp, corpus(&w.vocab, Language::Cpp, CPP, 4)),
        (Language::Cuda, corpus(&w.vocab, Language::Cuda, CUDA, 3)),
    ]);
    let parallel = vec![(corpora[&Language::Cpp][0].clone(), corpora[&Language::Cuda][0].clone())];
    let inputs = PlanInputs { vocab: &w.vocab, profiles: &w.profiles, tagset: AerTagSet::default(), corpora, parallel };
    let mut t = StubIdentity::default();
    let mut kinds = Vec::new();
    let report = run_plan(&plan, &inputs, &mut t, &mut |b| kinds.push(b[0].objective)).unwrap();
    assert!(t.decoder_initialized && report.decoder_initialized);
    assert_eq!(report.train_steps, t.steps.len());
    let phases: Vec<PhaseKind> = report.phases.iter().map(|p| p.kind).collect();
    assert_eq!(phases, vec![PhaseKind::Mlm, PhaseKind::Aer, PhaseKind::DaeBt, PhaseKind::Finetune]);
    // 7 documents in batches of 2
    assert_eq!(report.phases[0].epochs[0].batches, 4);
    assert_eq!(report.phases[0].epochs.len(), 2);
    let first_dae = kinds.iter().position(|&k| k == Objective::Dae).unwrap();
    assert!(kinds[..first_dae].iter().all(|&k| k == Objective::Mlm || k == Objective::Aer));
    assert_eq!(*kinds.last().unwrap(), Objective::Finetune);
    for r in &report.phases[2].epochs {
        assert_eq!(r.dae_bt[0].reconstruction_rate(), Some(100.0));
    }
    // stub loss decreases, so the last epoch of each phase wins
    for p in &report.phases {
        assert_eq!(p.best_epoch, Some(p.epochs.len() as u32 - 1));
    }
    // DAE+BT epochs carry the noise schedule forward
    assert_eq!(report.phases[2].epochs[1].dae_bt[0].epoch, 1);
}

#[test]
fn plan_validation() {
    assert!(SchedulePlan::from_toml("seed = 1").is_err());
    assert!(SchedulePlan::from_toml("batch_size = 0\n[[phase]]\nkind = \"mlm\"\nepochs = 1").is_err());
    assert!(SchedulePlan::from_toml("[[phase]]\nkind = \"dae\"\nepochs = 1").is_err());
    assert!(SchedulePlan::from_toml("pairs = [[\"cpp\", \"cpp\"]]\n[[phase]]\nkind = \"dae_bt\"\nepochs = 1").is_err());
    assert!(SchedulePlan::from_toml("bogus = 1\n[[phase]]\nkind = \"mlm\"\nepochs = 1").is_err());
    let p = SchedulePlan::from_toml("[[phase]]\nkind = \"mlm\"\nepochs = 1\n[phase.noise]\nmask_ratio = 0.3").unwrap();
    assert_eq!(p.phases[0].noise.as_ref().unwrap().mask_ratio, 0.3);
}
