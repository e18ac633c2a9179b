//! Translator running in a child process, spoken to in JSON lines.
//!
//! Requests, one per line on the child's stdin:
//! `{"op":"translate","tokens":[..],"src":"cpp","tgt":"cuda","beam_size":5}`,
//! `{"op":"train_step","batch":[TrainingExample..]}`,
//! `{"op":"init_decoder_from_encoder"}`.
//! Responses, one per line on stdout: `{"tokens":[..]}`, `{"loss":x}`,
//! `{"ok":true}`, or `{"error":"..."}` for a rejected request.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::port::{TranslatorError, TranslatorPort};
use crate::example::TrainingExample;
use crate::lang::Language;

struct Pipes {
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

pub struct ExternalTranslator {
    command: String,
    child: Child,
    pipes: Mutex<Pipes>,
}

impl ExternalTranslator {
    /// Start `command` (whitespace-separated program and arguments).
    pub fn spawn(command: &str) -> Result<Self, TranslatorError> {
        let mut parts = command.split_whitespace();
        let program = parts.next().ok_or_else(|| TranslatorError::Process("empty translator command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| TranslatorError::Process(format!("{command}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout piped"));
        Ok(Self { command: command.to_string(), child, pipes: Mutex::new(Pipes { stdin, stdout }) })
    }

    fn call(&self, request: Value) -> Result<Value, TranslatorError> {
        let mut p = self.pipes.lock().map_err(|_| TranslatorError::Process("poisoned pipe lock".into()))?;
        let dead = |e: std::io::Error| TranslatorError::Process(format!("{}: {e}", self.command));
        let stdin = p.stdin.as_mut().ok_or_else(|| TranslatorError::Process("stdin closed".into()))?;
        let mut line = serde_json::to_vec(&request).expect("requests serialize");
        line.push(b'\n');
        stdin.write_all(&line).map_err(dead)?;
        stdin.flush().map_err(dead)?;
        let mut resp = String::new();
        if p.stdout.read_line(&mut resp).map_err(dead)? == 0 {
            return Err(TranslatorError::Process(format!("{} closed its output", self.command)));
        }
        let v: Value = serde_json::from_str(resp.trim())
            .map_err(|e| TranslatorError::Protocol(format!("bad response {:?}: {e}", resp.trim())))?;
        if let Some(err) = v.get("error") {
            return Err(TranslatorError::Rejected(err.as_str().map_or_else(|| err.to_string(), str::to_string)));
        }
        Ok(v)
    }
}

impl TranslatorPort for ExternalTranslator {
    fn translate(&self, tokens: &[u32], src: Language, tgt: Language, beam_size: usize) -> Result<Vec<u32>, TranslatorError> {
        let v = self.call(json!({"op": "translate", "tokens": tokens, "src": src, "tgt": tgt, "beam_size": beam_size}))?;
        serde_json::from_value(v.get("tokens").cloned().unwrap_or(Value::Null))
            .map_err(|e| TranslatorError::Protocol(format!("translate response: {e}")))
    }

    fn train_step(&mut self, batch: &[TrainingExample]) -> Result<f64, TranslatorError> {
        let v = self.call(json!({"op": "train_step", "batch": batch}))?;
        v.get("loss").and_then(Value::as_f64).ok_or_else(|| TranslatorError::Protocol(format!("train_step response lacks loss: {v}")))
    }

    fn init_decoder_from_encoder(&mut self) -> Result<(), TranslatorError> {
        self.call(json!({"op": "init_decoder_from_encoder"})).map(|_| ())
    }
}

impl Drop for ExternalTranslator {
    fn drop(&mut self) {
        if let Ok(mut p) = self.pipes.lock() {
            p.stdin.take();
        }
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
