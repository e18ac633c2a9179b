use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{CompileError, CompileResult, CompileStatus, Diagnostic, Severity};
use crate::lang::Language;

fn default_timeout() -> u64 {
    60
}

/// Declarative description of how to run one compiler.
///
/// `command` may use `{file}` (the source file) and `{dir}` (a scratch
/// directory). `error_pattern` must define the groups `line` and `message`
/// and may define `file`, `col` and `severity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompilerAdapter {
    pub name: String,
    pub language: Language,
    pub command: Vec<String>,
    pub error_pattern: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default = "default_extension")]
    pub extension: String,
    /// Text placed before the source; diagnostics are shifted back by its line count.
    #[serde(default)]
    pub prelude: String,
    /// Environment variable that, when set, replaces the executable.
    #[serde(default)]
    pub exe_env: Option<String>,
    /// Remove `<<<...>>>` kernel launch configurations before compiling.
    #[serde(default)]
    pub strip_launch_config: bool,
}

fn default_extension() -> String {
    "txt".into()
}

const SHIM_PRELUDE: &str = include_str!("../../data/compilers/cuda_shim_prelude.h");

impl CompilerAdapter {
    pub const BUILTIN: [&'static str; 4] = ["nvcc", "cuda-shim", "g++", "gfortran"];

    pub fn builtin(name: &str) -> Option<Self> {
        let raw = match name {
            "nvcc" => include_str!("../../data/compilers/nvcc.json"),
            "cuda-shim" => include_str!("../../data/compilers/cuda-shim.json"),
            "g++" => include_str!("../../data/compilers/gxx.json"),
            "gfortran" => include_str!("../../data/compilers/gfortran.json"),
            _ => return None,
        };
        let mut a: Self = serde_json::from_str(raw).expect("shipped adapters parse");
        if name == "cuda-shim" {
            a.prelude = SHIM_PRELUDE.to_string();
        }
        Some(a)
    }

    /// The usual adapter for a language: nvcc for CUDA, g++ for C++, gfortran for Fortran.
    pub fn default_for(language: Language) -> Self {
        let name = match language {
            Language::Cuda => "nvcc",
            Language::Cpp => "g++",
            Language::Fortran => "gfortran",
        };
        Self::builtin(name).expect("builtin exists")
    }

    pub fn from_json(text: &str) -> Result<Self, CompileError> {
        let a: Self = serde_json::from_str(text).map_err(|e| CompileError::Adapter(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }

    /// A builtin name or a path to a JSON adapter file.
    pub fn resolve(spec: &str) -> Result<Self, CompileError> {
        if let Some(a) = Self::builtin(spec) {
            return Ok(a);
        }
        let text = std::fs::read_to_string(spec).map_err(|e| CompileError::Adapter(format!("{spec}: {e}")))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        if self.command.is_empty() {
            return Err(CompileError::Adapter(format!("{}: empty command", self.name)));
        }
        let re = Regex::new(&self.error_pattern).map_err(|e| CompileError::Adapter(e.to_string()))?;
        for g in ["line", "message"] {
            if !re.capture_names().flatten().any(|n| n == g) {
                return Err(CompileError::Adapter(format!("{}: error_pattern lacks group `{g}`", self.name)));
            }
        }
        Ok(())
    }

    pub fn executable(&self) -> String {
        self.exe_env
            .as_deref()
            .and_then(|v| std::env::var(v).ok())
            .filter(|v| !v.is_empty())
            .unwrap_or_else(|| self.command[0].clone())
    }

    pub fn with_timeout(mut self, secs: u64) -> Self {
        self.timeout_s = secs;
        self
    }

    fn prelude_lines(&self) -> usize {
        if self.prelude.is_empty() {
            0
        } else {
            self.prelude.lines().count()
        }
    }

    pub(crate) fn prepare(&self, source: &str) -> String {
        let body = if self.strip_launch_config { strip_launch_config(source) } else { source.to_string() };
        if self.prelude.is_empty() {
            body
        } else {
            let mut s = self.prelude.clone();
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s + &body
        }
    }

    /// Parse compiler output into diagnostics with lines relative to the user source.
    pub fn parse_diagnostics(&self, output: &str, file_name: &str) -> Vec<Diagnostic> {
        let re = Regex::new(&self.error_pattern).expect("validated pattern");
        let offset = self.prelude_lines();
        let mut out = Vec::new();
        for line in output.lines() {
            let Some(c) = re.captures(line) else { continue };
            let ours = c.name("file").is_none_or(|f| Path::new(f.as_str().trim()).ends_with(file_name));
            let raw: usize = c.name("line").and_then(|m| m.as_str().parse().ok()).unwrap_or(0);
            let severity = c.name("severity").map_or(Severity::Error, |m| Severity::parse(m.as_str()));
            out.push(Diagnostic {
                line: if ours { raw.saturating_sub(offset) } else { 0 },
                column: c.name("col").and_then(|m| m.as_str().parse().ok()).unwrap_or(0),
                severity,
                message: c["message"].trim().to_string(),
            });
        }
        out
    }

    /// Compile `source` and collect diagnostics.
    pub fn compile(&self, doc_id: &str, source: &str) -> Result<CompileResult, CompileError> {
        self.validate()?;
        let dir = tempfile::tempdir().map_err(CompileError::Io)?;
        let file_name = format!("input.{}", self.extension);
        let file = dir.path().join(&file_name);
        std::fs::write(&file, self.prepare(source)).map_err(CompileError::Io)?;
        let subst = |a: &str| {
            a.replace("{file}", &file.to_string_lossy()).replace("{dir}", &dir.path().to_string_lossy())
        };
        let exe = self.executable();
        let start = Instant::now();
        let mut child = Command::new(&exe)
            .args(self.command[1..].iter().map(|a| subst(a)))
            .current_dir(dir.path())
            .env("LC_ALL", "C")
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => CompileError::CompilerMissing(exe.clone()),
                _ => CompileError::Io(e),
            })?;
        let drain = |r: Option<Box<dyn Read + Send>>| {
            std::thread::spawn(move || {
                let mut s = Vec::new();
                if let Some(mut r) = r {
                    let _ = r.read_to_end(&mut s);
                }
                s
            })
        };
        let out_t = drain(child.stdout.take().map(|r| Box::new(r) as Box<dyn Read + Send>));
        let err_t = drain(child.stderr.take().map(|r| Box::new(r) as Box<dyn Read + Send>));
        let limit = Duration::from_secs(self.timeout_s);
        let status = loop {
            if let Some(s) = child.try_wait().map_err(CompileError::Io)? {
                break s;
            }
            if start.elapsed() >= limit {
                let _ = child.kill();
                let _ = child.wait();
                return Err(CompileError::Timeout { secs: self.timeout_s });
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let elapsed = start.elapsed();
        let mut text = String::from_utf8_lossy(&err_t.join().unwrap_or_default()).into_owned();
        text.push('\n');
        text.push_str(&String::from_utf8_lossy(&out_t.join().unwrap_or_default()));

        let mut diagnostics = self.parse_diagnostics(&text, &file_name);
        let has_error = diagnostics.iter().any(|d| d.severity == Severity::Error);
        if !status.success() && !has_error {
            let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
            diagnostics.push(Diagnostic {
                line: 0,
                column: 0,
                severity: Severity::Error,
                message: format!("{exe} exited with {status}: {first}"),
            });
        }
        let status = if diagnostics.iter().any(|d| d.severity == Severity::Error) {
            CompileStatus::Error
        } else {
            CompileStatus::Ok
        };
        Ok(CompileResult {
            doc_id: doc_id.to_string(),
            status,
            diagnostics,
            compiler: self.name.clone(),
            language: self.language,
            elapsed_ms: elapsed.as_millis() as u64,
        })
    }
}

/// Drop `<<<...>>>` launch configurations so a host compiler sees a plain call.
pub fn strip_launch_config(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    let mut rest = source;
    while let Some(i) = rest.find("<<<") {
        match rest[i..].find(">>>") {
            Some(j) => {
                out.push_str(&rest[..i]);
                rest = &rest[i + j + 3..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}
