use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const CPP: &str = "#include <vector>\nint sum(const std::vector<int>& v) {\n  int s = 0;\n  for (int i = 0; i < (int)v.size(); ++i) s += v[i];\n  return s;\n}\n";
const CUDA: &str = "__global__ void saxpy(int n, float a, float *x, float *y) {\n  int i = blockIdx.x * blockDim.x + threadIdx.x;\n  if (i < n) y[i] = a * x[i] + y[i];\n}\n";
const CUDA2: &str = "__global__ void fill(int *v, int n) {\n  int i = threadIdx.x;\n  if (i < n) v[i] = 0;\n  __syncthreads();\n}\n";

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge")).current_dir(dir).args(args).output().expect("forge runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = forge(dir, args);
    assert!(out.status.success(), "forge {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

/// Source tree, vocabulary, encoded corpus and profiles.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::create_dir_all(p.join("src/sub")).unwrap();
    std::fs::write(p.join("src/a.cpp"), CPP).unwrap();
    std::fs::write(p.join("src/b.cu"), CUDA).unwrap();
    std::fs::write(p.join("src/sub/c.cu"), CUDA2).unwrap();
    ok(p, &["tok", "train", "--vocab-size", "400", "--out", "vocab.txt", "src"]);
    ok(p, &["tok", "encode", "--vocab", "vocab.txt", "-o", "enc.jsonl", "src"]);
    std::fs::create_dir(p.join("prof")).unwrap();
    ok(p, &["profile", "build", "--lang", "cpp", "--vocab", "vocab.txt", "--out", "prof/cpp.profile", "src"]);
    ok(p, &["profile", "build", "--lang", "cuda", "--vocab", "vocab.txt", "--out", "prof/cuda.profile", "src"]);
    dir
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(forge(dir.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(forge(dir.path(), &["score"]).status.code(), Some(2));
    assert_eq!(forge(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn score_identical_pairs_gives_100() {
    let dir = tempfile::tempdir().unwrap();
    let lines = [
        r#"{"id":"1","hypothesis":"int x = 1;","reference":"int x = 1;"}"#,
        r#"{"id":"2","hypothesis":"__global__ void k(int *a) { a[threadIdx.x] = 0; }","reference":"__global__ void k(int *a) { a[threadIdx.x] = 0; }"}"#,
    ];
    std::fs::write(dir.path().join("pairs.jsonl"), lines.join("\n")).unwrap();
    let out = ok(dir.path(), &["score", "--lang", "cuda", "pairs.jsonl"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["bleu", "codebleu", "chrf", "rouge_l", "ngram", "weighted_ngram", "ast_match", "dataflow_match"] {
        assert_eq!(report["corpus"][k], 100.0, "{k}");
    }
    for pair in report["pairs"].as_array().unwrap() {
        assert_eq!(pair["bleu"], 100.0);
        assert_eq!(pair["codebleu"]["codebleu"], 100.0);
    }
    let out = ok(dir.path(), &["score", "--lang", "cuda", "--weights", "0.1,0.2,0.3,0.4", "pairs.jsonl"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pairs"][0]["codebleu"]["weights"]["dataflow"], 0.4);
    for bad in ["0.5,0.5,0.5,0.5", "0.5,0.5"] {
        let out = forge(dir.path(), &["score", "--lang", "cuda", "--weights", bad, "pairs.jsonl"]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("weights"), "{bad}");
    }
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{not json}\n").unwrap();
    let out = forge(dir.path(), &["score", "--lang", "cpp", "bad.jsonl"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').rfind(|l| !l.is_empty()).unwrap()).unwrap();
    assert_eq!(err["exit_code"], 3);
    assert_eq!(forge(dir.path(), &["score", "--lang", "cpp", "missing.jsonl"]).status.code(), Some(3));
}

#[test]
fn same_seed_gives_identical_manifests() {
    let w = workspace();
    let p = w.path();
    let run = |tag: &str, seed: &str| {
        let out = format!("dae-{tag}.jsonl");
        ok(p, &["--seed", seed, "noise", "dae", "--epoch", "2", "--vocab", "vocab.txt", "--profiles", "prof", "-o", &out, "enc.jsonl"]);
        let mut m = without_time(json(p.join(format!("{out}.manifest.json"))));
        let (k, v) = m["outputs"].as_object().unwrap().iter().next().map(|(k, v)| (k.clone(), v.clone())).unwrap();
        assert_eq!(k, out);
        m["outputs"] = Value::Null;
        m["command"] = Value::Null;
        (m, v)
    };
    let (m1, d1) = run("a", "9");
    let (m2, d2) = run("b", "9");
    let (m3, d3) = run("c", "10");
    assert_eq!(m1, m2);
    assert_eq!(d1, d2);
    assert_ne!(d1, d3);
    assert_ne!(m1, m3);
    assert_eq!(std::fs::read(p.join("dae-a.jsonl")).unwrap(), std::fs::read(p.join("dae-b.jsonl")).unwrap());
}

#[test]
fn tokenizer_round_trip_and_determinism() {
    let w = workspace();
    let p = w.path();
    ok(p, &["tok", "train", "--vocab-size", "400", "--out", "vocab2.txt", "src"]);
    assert_eq!(std::fs::read(p.join("vocab.txt")).unwrap(), std::fs::read(p.join("vocab2.txt")).unwrap());
    let out = ok(p, &["tok", "decode", "--vocab", "vocab.txt", "enc.jsonl"]);
    let texts: Vec<Value> = out.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()).map(|l| serde_json::from_slice(l).unwrap()).collect();
    let mut got: Vec<&str> = texts.iter().map(|t| t["text"].as_str().unwrap()).collect();
    got.sort();
    let mut want = vec![CPP, CUDA, CUDA2];
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn noise_and_aer_emit_training_records() {
    let w = workspace();
    let p = w.path();
    let out = ok(p, &["noise", "mlm", "--vocab", "vocab.txt", "--mask-ratio", "0.3", "enc.jsonl"]);
    let first: Value = serde_json::from_slice(out.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(first["objective"], "mlm");
    assert_eq!(first["input"].as_array().unwrap().len(), first["target"].as_array().unwrap().len());

    let out = ok(p, &["aer", "label", "--lang", "cuda", "--vocab", "vocab.txt", "--cuda-extended", "-o", "aer.jsonl", "src"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(p.join("aer.jsonl")).unwrap();
    let recs: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 2);
    for r in &recs {
        assert_eq!(r["tokens"].as_array().unwrap().len(), r["labels"].as_array().unwrap().len());
        assert_eq!(r["language"], "cuda");
    }
    assert!(p.join("aer.jsonl.manifest.json").exists());

    // a bare noise table works as --config
    std::fs::write(p.join("noise.toml"), "drop_ratio = 0.0\nmask_ratio = 0.0\ninsert_ratio = 0.0\nshuffle_window = 1\n").unwrap();
    let out = ok(p, &["noise", "dae", "--config", "noise.toml", "--vocab", "vocab.txt", "--profiles", "prof", "enc.jsonl"]);
    for line in out.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
        let ex: Value = serde_json::from_slice(line).unwrap();
        assert_eq!(ex["input"].as_array().unwrap()[1..], ex["target"].as_array().unwrap()[..]);
    }
    std::fs::write(p.join("bad.toml"), "drop_ratio = 2.0\n").unwrap();
    let out = forge(p, &["noise", "dae", "--config", "bad.toml", "--vocab", "vocab.txt", "--profiles", "prof", "enc.jsonl"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn corpus_commands() {
    let w = workspace();
    let p = w.path();
    ok(p, &["corpus", "filter", "--lang", "cuda", "--min-tokens", "5", "--max-tokens", "1000", "--out", "kept.jsonl", "--stats", "stats.json", "src"]);
    let kept = std::fs::read_to_string(p.join("kept.jsonl")).unwrap();
    assert_eq!(kept.lines().count(), 2, "only CUDA files carry CUDA keywords");
    let stats = json(p.join("stats.json"));
    assert_eq!(stats["stages"][0]["stage"], "keywords");
    assert_eq!(stats["stages"][0]["total"]["dropped"], 1);

    let out = forge(p, &["corpus", "filter", "--lang", "cuda", "--min-tokens", "50", "--max-tokens", "10", "--out", "x.jsonl", "src"]);
    assert_eq!(out.status.code(), Some(3));

    ok(p, &["corpus", "filter", "--lang", "cpp", "--no-keyword-filter", "--out", "cpp.jsonl", "src/a.cpp"]);
    ok(p, &["--seed", "5", "corpus", "balance", "--out-a", "ba.jsonl", "--out-b", "bb.jsonl", "cpp.jsonl", "kept.jsonl"]);
    assert_eq!(std::fs::read_to_string(p.join("ba.jsonl")).unwrap().lines().count(), 1);
    assert_eq!(std::fs::read_to_string(p.join("bb.jsonl")).unwrap().lines().count(), 1);
    let m1 = without_time(json(p.join("bb.jsonl.manifest.json")));
    ok(p, &["--seed", "5", "corpus", "balance", "--out-a", "ba.jsonl", "--out-b", "bb.jsonl", "cpp.jsonl", "kept.jsonl"]);
    assert_eq!(without_time(json(p.join("bb.jsonl.manifest.json"))), m1);

    let out = ok(p, &["corpus", "stats", "src"]);
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["languages"]["cuda"]["files"], 2);

    std::fs::write(
        p.join("syn.jsonl"),
        [
            r#"{"source":"int a;","candidate":""}"#,
            r#"{"source":"int a;","candidate":"__global__ void k() {}"}"#,
            r#"{"source":"int a;","candidate":"This kernel uses threadIdx\nto do things\nin parallel"}"#,
        ]
        .join("\n"),
    )
    .unwrap();
    ok(p, &["corpus", "synthetic", "--lang", "cuda", "--out", "syn_kept.jsonl", "syn.jsonl"]);
    assert_eq!(std::fs::read_to_string(p.join("syn_kept.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn quality_with_cache_and_command_labeler() {
    let w = workspace();
    let p = w.path();
    std::fs::write(p.join("judge.sh"), "#!/bin/sh\nif grep -q threadIdx; then echo yes; else echo no; fi\n").unwrap();
    ok(p, &["corpus", "quality", "--cache", "labels.jsonl", "--labeler-cmd", "sh judge.sh", "--out", "good.jsonl", "src"]);
    assert_eq!(std::fs::read_to_string(p.join("good.jsonl")).unwrap().lines().count(), 2);
    assert_eq!(std::fs::read_to_string(p.join("labels.jsonl")).unwrap().lines().count(), 3);
    // offline rerun from the cache alone
    let out = Command::new(env!("CARGO_BIN_EXE_forge"))
        .current_dir(p)
        .env_remove("FORGE_LABELER_URL")
        .args(["corpus", "quality", "--cache", "labels.jsonl", "--out", "good2.jsonl", "src"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(p.join("good.jsonl")).unwrap(), std::fs::read(p.join("good2.jsonl")).unwrap());
    let out = Command::new(env!("CARGO_BIN_EXE_forge"))
        .current_dir(p)
        .env_remove("FORGE_LABELER_URL")
        .args(["corpus", "quality", "--out", "good3.jsonl", "src"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

const PLAN: &str = "seed = 4\nbatch_size = 1\nmeasure_reconstruction = true\n\n[[phase]]\nkind = \"mlm\"\nepochs = 1\n\n[[phase]]\nkind = \"aer\"\nepochs = 1\n\n[[phase]]\nkind = \"dae_bt\"\nepochs = 2\n";

#[test]
fn train_with_stub_translators() {
    let w = workspace();
    let p = w.path();
    std::fs::write(p.join("plan.toml"), PLAN).unwrap();
    ok(p, &["train", "--plan", "plan.toml", "--vocab", "vocab.txt", "--profiles", "prof", "--emit", "ex.jsonl", "--report", "rep.json", "src"]);
    let rep = json(p.join("rep.json"));
    assert_eq!(rep["decoder_initialized"], true);
    let dae = &rep["phases"][2]["epochs"][0]["dae_bt"][0];
    assert_eq!(dae["reconstruction_exact"], dae["reconstruction_total"]);
    assert_eq!(dae["dae_batches"], dae["bt_batches"]);
    let m1 = without_time(json(p.join("rep.json.manifest.json")));
    assert_eq!(m1["seed"], 4);

    ok(p, &["train", "--plan", "plan.toml", "--vocab", "vocab.txt", "--profiles", "prof", "--emit", "ex.jsonl", "--report", "rep.json", "src"]);
    assert_eq!(without_time(json(p.join("rep.json.manifest.json"))), m1);

    std::fs::write(p.join("dict.txt"), "cpp cuda for parallel_for\n").unwrap();
    ok(p, &["train", "--plan", "plan.toml", "--translator", "stub-dict:dict.txt", "--vocab", "vocab.txt", "--profiles", "prof", "--emit", "ex2.jsonl", "--report", "rep2.json", "src"]);
    let v = std::fs::read_to_string(p.join("ex2.jsonl")).unwrap();
    assert!(v.lines().any(|l| l.contains("\"objective\":\"bt\"")));
}

#[test]
fn train_errors_map_to_exit_codes() {
    let w = workspace();
    let p = w.path();
    std::fs::write(p.join("plan.toml"), PLAN).unwrap();
    let base = ["train", "--plan", "plan.toml", "--vocab", "vocab.txt", "--profiles", "prof"];
    let run = |extra: &[&str]| forge(p, &[&base[..], extra, &["src"]].concat()).status.code();
    assert_eq!(run(&["--translator", "nonsense"]), Some(2));
    assert_eq!(run(&["--translator", "external:/nonexistent/translator"]), Some(4));
    std::fs::write(p.join("bad.toml"), "[[phase]]\nkind = \"nope\"\nepochs = 1\n").unwrap();
    let out = forge(p, &["train", "--plan", "bad.toml", "--vocab", "vocab.txt", "src"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_with_external_translator() {
    if Command::new("python3").arg("--version").output().is_err() {
        return;
    }
    let w = workspace();
    let p = w.path();
    std::fs::write(p.join("plan.toml"), PLAN).unwrap();
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/translator/identity.py");
    let spec = format!("external:python3 {}", script.display());
    ok(p, &["train", "--plan", "plan.toml", "--translator", &spec, "--vocab", "vocab.txt", "--profiles", "prof", "--report", "rep.json", "src"]);
    let rep = json(p.join("rep.json"));
    let dae = &rep["phases"][2]["epochs"][1]["dae_bt"][0];
    assert_eq!(dae["reconstruction_exact"], dae["reconstruction_total"]);
}

#[test]
fn compile_fixtures_with_repair() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/repair");
    if Command::new("g++").arg("--version").output().is_err() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    for name in ["set_valid_mask_gpu.cu", "get_ev.cu", "missing_brace.cu", "valid.cu"] {
        std::fs::copy(fixtures.join(name), dir.path().join(name)).unwrap();
    }
    let p = dir.path();
    ok(p, &["compile", "--lang", "cuda", "--adapter", "cuda-shim", "--report", "plain.json", "."]);
    ok(p, &["compile", "--lang", "cuda", "--adapter", "cuda-shim", "--repair", "--report", "fixed.json", "."]);
    let plain = json(p.join("plain.json"));
    let fixed = json(p.join("fixed.json"));
    assert_eq!(plain["compiled"], 1);
    assert_eq!(fixed["compiled"], 4);
    assert!(fixed["accuracy"].as_f64() >= plain["accuracy"].as_f64());
    assert!(p.join("fixed.json.manifest.json").exists());
    assert_eq!(forge(p, &["compile", "--lang", "cpp", "--adapter", "cuda-shim", "."]).status.code(), Some(2));
}
