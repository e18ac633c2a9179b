use std::path::Path;

use super::AerError;

/// Entity categories with their begin ids. Id 0 is `O`; `id + 1` is the
/// continuation id used for the second and later subword tokens of a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AerTagSet {
    tags: Vec<(u32, String)>,
}

pub const OUTSIDE: u32 = 0;

impl Default for AerTagSet {
    fn default() -> Self {
        Self::from_text(include_str!("../../data/aer/tags.txt")).expect("shipped tag table is valid")
    }
}

impl AerTagSet {
    /// Default table plus a `parallel_construct` category for CUDA builtins.
    pub fn cuda_extended() -> Self {
        Self::from_text(include_str!("../../data/aer/tags_cuda_extended.txt")).expect("shipped tag table is valid")
    }

    pub fn new(tags: Vec<(u32, String)>) -> Result<Self, AerError> {
        for (i, (id, name)) in tags.iter().enumerate() {
            if *id == OUTSIDE || id % 2 == 0 {
                return Err(AerError::TagSet(format!("tag `{name}` has id {id}; begin ids must be odd")));
            }
            if tags[..i].iter().any(|(j, n)| j == id || n == name) {
                return Err(AerError::TagSet(format!("duplicate tag `{name}` / id {id}")));
            }
        }
        Ok(Self { tags })
    }

    pub fn from_text(text: &str) -> Result<Self, AerError> {
        let mut tags = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (id, name) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| AerError::TagSet(format!("expected `<id> <name>`, got `{line}`")))?;
            let id = id.parse().map_err(|_| AerError::TagSet(format!("bad tag id `{id}`")))?;
            tags.push((id, name.trim().to_string()));
        }
        Self::new(tags)
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(Self::from_text(&text)?)
    }

    pub fn outside_id(&self) -> u32 {
        OUTSIDE
    }

    pub fn tags(&self) -> &[(u32, String)] {
        &self.tags
    }

    pub fn id_of(&self, name: &str) -> Option<u32> {
        self.tags.iter().find(|(_, n)| n == name).map(|(id, _)| *id)
    }

    /// Category name for a begin or continuation id; `O` for 0.
    pub fn name_of(&self, id: u32) -> Option<&str> {
        if id == OUTSIDE {
            return Some("O");
        }
        let begin = if id.is_multiple_of(2) { id - 1 } else { id };
        self.tags.iter().find(|(i, _)| *i == begin).map(|(_, n)| n.as_str())
    }

    /// Largest id in use, continuation ids included.
    pub fn max_id(&self) -> u32 {
        self.tags.iter().map(|(id, _)| id + 1).max().unwrap_or(0)
    }
}
