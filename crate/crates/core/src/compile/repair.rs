use std::collections::BTreeSet;

use tree_sitter::Node;

use super::classify::used_as_bound;
use super::{CompileError, ErrorCategory};
use crate::lang::Language;
use crate::syntax::{self, field_name, preorder};

pub const RULE_TEMPLATE_T: &str = "template_t";
pub const RULE_ADD_PARAMETER: &str = "add_int_parameter";
pub const RULE_CLOSE_DELIMITERS: &str = "close_delimiters";

/// A repaired source and the rule that produced it; `rule` is `None` when
/// the rule found nothing to change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub source: String,
    pub rule: Option<&'static str>,
}

/// Openers left unclosed outside string/char literals and comments, innermost last.
/// A closer that does not match the innermost opener is ignored.
pub fn unclosed_delimiters(source: &str) -> Vec<char> {
    let b = source.as_bytes();
    let mut stack = Vec::new();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                i += 2;
                while i < b.len() && !(b[i] == b'*' && b.get(i + 1) == Some(&b'/')) {
                    i += 1;
                }
                i += 1;
            }
            q @ (b'"' | b'\'') => {
                i += 1;
                while i < b.len() && b[i] != q && b[i] != b'\n' {
                    if b[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
            }
            c @ (b'(' | b'[' | b'{') => stack.push(c as char),
            c @ (b')' | b']' | b'}') => {
                let open = match c {
                    b')' => '(',
                    b']' => '[',
                    _ => '{',
                };
                if stack.last() == Some(&open) {
                    stack.pop();
                }
            }
            _ => {}
        }
        i += 1;
    }
    stack
}

/// Append the closers for every unclosed delimiter, innermost first.
pub fn close_delimiters(source: &str) -> String {
    let open = unclosed_delimiters(source);
    if open.is_empty() {
        return source.to_string();
    }
    let mut s = source.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    for c in open.into_iter().rev() {
        s.push(match c {
            '(' => ')',
            '[' => ']',
            _ => '}',
        });
        s.push('\n');
    }
    s
}

fn function_definitions(root: Node<'_>) -> Vec<Node<'_>> {
    preorder(root).into_iter().filter(|n| n.kind() == "function_definition").collect()
}

fn mentions_type<'t>(node: Node<'t>, source: &str, name: &str) -> bool {
    preorder(node)
        .into_iter()
        .any(|n| matches!(n.kind(), "type_identifier" | "identifier") && &source[n.byte_range()] == name)
}

/// Put `template <typename T>` in front of every non-template function that uses `T`.
fn add_template(source: &str, language: Language) -> String {
    let Ok(tree) = syntax::parse(source, language) else { return source.to_string() };
    let mut inserts: Vec<(usize, String)> = Vec::new();
    for f in function_definitions(tree.root_node()) {
        if f.parent().is_some_and(|p| p.kind() == "template_declaration") || !mentions_type(f, source, "T") {
            continue;
        }
        let start = f.start_byte();
        let line_start = source[..start].rfind('\n').map_or(0, |i| i + 1);
        let indent = &source[line_start..start];
        if indent.chars().all(char::is_whitespace) {
            inserts.push((line_start, format!("{indent}template <typename T>\n")));
        } else {
            inserts.push((start, "template <typename T> ".to_string()));
        }
    }
    let mut s = source.to_string();
    for (at, text) in inserts.into_iter().rev() {
        s.insert_str(at, &text);
    }
    s
}

fn declared_name<'t>(mut node: Node<'t>) -> Option<Node<'t>> {
    loop {
        match node.kind() {
            "identifier" => return Some(node),
            "pointer_declarator" | "array_declarator" | "reference_declarator" | "init_declarator"
            | "parenthesized_declarator" => {
                node = node.child_by_field_name("declarator").or_else(|| node.named_child(0))?;
            }
            _ => return None,
        }
    }
}

fn declared_in<'t>(scope: Node<'t>, source: &'t str, out: &mut BTreeSet<&'t str>) {
    for n in preorder(scope) {
        if matches!(n.kind(), "declaration" | "parameter_declaration" | "optional_parameter_declaration" | "field_declaration")
        {
            let mut c = n.walk();
            for d in n.children_by_field_name("declarator", &mut c) {
                if let Some(id) = declared_name(d) {
                    out.insert(&source[id.byte_range()]);
                }
            }
        }
        if n.kind() == "for_range_loop" {
            if let Some(id) = n.child_by_field_name("declarator").and_then(declared_name) {
                out.insert(&source[id.byte_range()]);
            }
        }
        if matches!(n.kind(), "preproc_def" | "preproc_function_def") {
            if let Some(id) = n.child_by_field_name("name") {
                out.insert(&source[id.byte_range()]);
            }
        }
        if n.kind() == "enumerator" {
            if let Some(id) = n.child_by_field_name("name") {
                out.insert(&source[id.byte_range()]);
            }
        }
    }
}

fn is_plain_variable(n: Node<'_>) -> bool {
    let Some(p) = n.parent() else { return false };
    !matches!(
        (p.kind(), field_name(n)),
        ("call_expression", Some("function"))
            | ("function_declarator", Some("declarator"))
            | ("qualified_identifier", _)
            | ("template_function", _)
            | ("preproc_def", _)
            | ("preproc_function_def", _)
            | ("preproc_params", _)
    )
}

/// Give each function an `int` parameter for every undeclared identifier it uses as a bound.
fn add_parameters(source: &str, language: Language) -> String {
    let Ok(tree) = syntax::parse(source, language) else { return source.to_string() };
    let root = tree.root_node();
    let mut known: BTreeSet<&str> = BTreeSet::new();
    let mut c = root.walk();
    for top in root.named_children(&mut c) {
        if top.kind() != "function_definition" {
            declared_in(top, source, &mut known);
        }
    }
    let builtins: BTreeSet<String> = Language::Cuda
        .default_keywords()
        .into_iter()
        .chain(["true", "false", "NULL", "nullptr", "this"].map(String::from))
        .collect();

    let mut edits: Vec<(usize, usize, String)> = Vec::new();
    for f in function_definitions(root) {
        let mut declared = known.clone();
        declared_in(f, source, &mut declared);
        let mut missing: Vec<&str> = Vec::new();
        for n in preorder(f) {
            if n.kind() != "identifier" || !is_plain_variable(n) {
                continue;
            }
            let name = &source[n.byte_range()];
            if declared.contains(name) || builtins.contains(name) || missing.contains(&name) || !used_as_bound(n) {
                continue;
            }
            missing.push(name);
        }
        if missing.is_empty() {
            continue;
        }
        let Some(params) = f
            .child_by_field_name("declarator")
            .and_then(|d| preorder(d).into_iter().find(|n| n.kind() == "parameter_list"))
        else {
            continue;
        };
        let close = params.end_byte() - 1;
        let inner = source[params.start_byte() + 1..close].trim();
        let added = missing.iter().map(|m| format!("int {m}")).collect::<Vec<_>>().join(", ");
        if inner.is_empty() || inner == "void" {
            edits.push((params.start_byte() + 1, close, added));
        } else {
            edits.push((close, close, format!(", {added}")));
        }
    }
    let mut s = source.to_string();
    for (a, b, text) in edits.into_iter().rev() {
        s.replace_range(a..b, &text);
    }
    s
}

/// Apply the fix rule for `category`. Each rule is idempotent.
pub fn repair(source: &str, category: ErrorCategory, language: Language) -> Result<Repair, CompileError> {
    let (fixed, rule) = match category {
        ErrorCategory::UndefinedGenericT => (add_template(source, language), RULE_TEMPLATE_T),
        ErrorCategory::MissingVariableInit => (add_parameters(source, language), RULE_ADD_PARAMETER),
        ErrorCategory::MissingBraces => (close_delimiters(source), RULE_CLOSE_DELIMITERS),
        c => return Err(CompileError::Unrepairable(c)),
    };
    let rule = (fixed != source).then_some(rule);
    Ok(Repair { source: fixed, rule })
}
