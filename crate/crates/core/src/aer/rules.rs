use regex::Regex;
use tree_sitter::Node;

use super::AerError;
use crate::lang::Language;
use crate::syntax::field_name;

/// Maps one tree-sitter node shape to an entity category.
#[derive(Debug, Clone)]
pub struct MappingRule {
    /// Node kind; `_` matches any anonymous node.
    pub kind: String,
    pub parent: Option<String>,
    pub field: Option<String>,
    pub parent_field: Option<String>,
    pub text: Option<Regex>,
    pub category: String,
}

impl MappingRule {
    pub fn matches(&self, node: Node<'_>, source: &str) -> bool {
        let kind_ok = if self.kind == "_" { !node.is_named() } else { node.kind() == self.kind };
        if !kind_ok {
            return false;
        }
        if let Some(p) = &self.parent {
            if node.parent().map(|n| n.kind()) != Some(p.as_str()) {
                return false;
            }
        }
        if let Some(f) = &self.field {
            if field_name(node) != Some(f.as_str()) {
                return false;
            }
        }
        if let Some(f) = &self.parent_field {
            match node.parent() {
                Some(parent) if field_name(parent) == Some(f.as_str()) => {}
                _ => return false,
            }
        }
        if let Some(re) = &self.text {
            if !re.is_match(&source[node.byte_range()]) {
                return false;
            }
        }
        true
    }
}

/// Ordered rule list for one language.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub rules: Vec<MappingRule>,
}

fn shipped(name: &str) -> Option<&'static str> {
    match name {
        "cpp" => Some(include_str!("../../data/aer/cpp.rules")),
        "cuda" => Some(include_str!("../../data/aer/cuda.rules")),
        "fortran" => Some(include_str!("../../data/aer/fortran.rules")),
        _ => None,
    }
}

impl RuleSet {
    pub fn for_language(lang: Language) -> Self {
        Self::parse(shipped(lang.tag()).unwrap()).expect("shipped rules are valid")
    }

    /// Parse the rule text format. `include <lang>` splices a shipped rule file.
    pub fn parse(text: &str) -> Result<Self, AerError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| AerError::Rules { line: line_no, reason };
            if let Some(name) = line.strip_prefix("include ") {
                let inc = shipped(name.trim()).ok_or_else(|| err(format!("unknown include `{name}`")))?;
                rules.extend(Self::parse(inc)?.rules);
                continue;
            }
            let (lhs, category) = line.rsplit_once(" => ").ok_or_else(|| err("missing ` => <category>`".into()))?;
            let mut parts = lhs.split_whitespace();
            let kind = parts.next().ok_or_else(|| err("missing node kind".into()))?.to_string();
            let mut rule = MappingRule {
                kind,
                parent: None,
                field: None,
                parent_field: None,
                text: None,
                category: category.trim().to_string(),
            };
            for p in parts {
                let (k, v) = p.split_once('=').ok_or_else(|| err(format!("bad condition `{p}`")))?;
                match k {
                    "parent" => rule.parent = Some(v.to_string()),
                    "field" => rule.field = Some(v.to_string()),
                    "parent_field" => rule.parent_field = Some(v.to_string()),
                    "text" => rule.text = Some(Regex::new(v).map_err(|e| err(e.to_string()))?),
                    _ => return Err(err(format!("unknown condition `{k}`"))),
                }
            }
            rules.push(rule);
        }
        Ok(Self { rules })
    }
}
