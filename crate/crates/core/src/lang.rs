//! Source languages handled by the pipeline and their shipped keyword lists.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Cpp,
    Cuda,
    Fortran,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Cpp, Language::Cuda, Language::Fortran];

    pub fn tag(self) -> &'static str {
        match self {
            Language::Cpp => "cpp",
            Language::Cuda => "cuda",
            Language::Fortran => "fortran",
        }
    }

    /// Text of the `<LANG>` special token prepended to sequences.
    pub fn token_text(self) -> String {
        format!("<{}>", self.tag())
    }

    /// Fortran is case-insensitive; keyword lookups fold to lower case.
    pub fn case_insensitive(self) -> bool {
        matches!(self, Language::Fortran)
    }

    /// Key used when comparing a surface word against a keyword set.
    pub fn keyword_key(self, word: &str) -> String {
        if self.case_insensitive() {
            word.to_ascii_lowercase()
        } else {
            word.to_string()
        }
    }

    pub fn default_keywords(self) -> BTreeSet<String> {
        let raw = match self {
            Language::Cpp => include_str!("../data/keywords/cpp.txt"),
            Language::Cuda => include_str!("../data/keywords/cuda.txt"),
            Language::Fortran => include_str!("../data/keywords/fortran.txt"),
        };
        parse_keyword_list(raw)
    }

    pub fn file_extensions(self) -> &'static [&'static str] {
        match self {
            Language::Cpp => &["cpp", "cc", "cxx", "hpp", "h", "c"],
            Language::Cuda => &["cu", "cuh"],
            Language::Fortran => &["f", "f90", "f95", "f03", "for"],
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown language `{0}` (expected cpp, cuda or fortran)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cpp" | "c++" | "cxx" => Ok(Language::Cpp),
            "cuda" | "cu" => Ok(Language::Cuda),
            "fortran" | "f90" | "f" => Ok(Language::Fortran),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

/// One keyword per line; blank lines and `#` comments are ignored.
pub fn parse_keyword_list(raw: &str) -> BTreeSet<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}
