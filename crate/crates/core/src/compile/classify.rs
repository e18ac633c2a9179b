use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use tree_sitter::Node;

use super::repair::unclosed_delimiters;
use super::{CompileError, CompileResult, CompileStatus, ErrorCategory};
use crate::lang::Language;
use crate::syntax::{self, field_name, preorder};

static UNDEFINED: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        r#"identifier "(\w+)" is undefined"#,
        r"['‘`](\w+)['’] was not declared in this scope",
        r"['‘`](\w+)['’] does not name a type",
        r"['‘`](\w+)['’] has not been declared",
        r"use of undeclared identifier ['‘`](\w+)['’]",
        r"unknown type name ['‘`](\w+)['’]",
        r"Symbol ['‘`](\w+)['’] at \(\d+\) has no IMPLICIT type",
    ]
    .iter()
    .map(|p| Regex::new(p).expect("static pattern"))
    .collect()
});

const BRACE_MESSAGES: &[&str] = &["expected '}'", "expected ‘}’", "expected a \"}\"", "expected a '}'"];

const CALL_MESSAGES: &[&str] = &[
    "no matching function",
    "no instance of overloaded function",
    "too few arguments",
    "too many arguments",
    "cannot be used as a function",
    "no member named",
    "has no member",
    "is not a member of",
];

/// Identifiers that error diagnostics report as undeclared, in order of first report.
pub fn undefined_identifiers(result: &CompileResult) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in result.errors() {
        for re in UNDEFINED.iter() {
            for c in re.captures_iter(&d.message) {
                if seen.insert(c[1].to_string()) {
                    out.push(c[1].to_string());
                }
            }
        }
    }
    out
}

const ARITHMETIC: &[&str] = &["binary_expression", "parenthesized_expression", "math_expression", "unary_expression", "cast_expression"];

/// True if `node` feeds a comparison, an array size or a loop bound.
pub(crate) fn used_as_bound(node: Node<'_>) -> bool {
    let mut cur = node;
    while let Some(p) = cur.parent() {
        match p.kind() {
            "binary_expression" | "relational_expression" => {
                let op = p.child_by_field_name("operator").map(|o| o.kind()).unwrap_or("");
                if matches!(op, "<" | "<=" | ">" | ">=" | ".lt." | ".le." | ".gt." | ".ge.") {
                    return true;
                }
            }
            "array_declarator" => return field_name(cur) == Some("size"),
            "loop_control_expression" | "size" | "new_expression" => return true,
            "for_statement" => return field_name(cur) == Some("condition"),
            k if ARITHMETIC.contains(&k) => {}
            _ => return false,
        }
        cur = p;
    }
    false
}

fn is_callee(node: Node<'_>) -> bool {
    node.parent().is_some_and(|p| {
        (p.kind() == "call_expression" && field_name(node) == Some("function"))
            || (p.kind() == "subroutine_call" && field_name(node) == Some("subroutine"))
    })
}

fn occurrences<'t>(root: Node<'t>, source: &str, name: &str) -> Vec<Node<'t>> {
    preorder(root).into_iter().filter(|n| n.kind() == "identifier" && &source[n.byte_range()] == name).collect()
}

/// Assign a failed compile to one category.
///
/// The cascade, first match wins: an undefined `T`; an undefined identifier
/// used as a bound or size; unbalanced delimiters or a missing-`}`
/// diagnostic; a bad call (overload mismatch, wrong arity, undefined callee);
/// otherwise nontrivial.
pub fn classify_error(result: &CompileResult, source: &str, language: Language) -> Result<ErrorCategory, CompileError> {
    if result.status == CompileStatus::Ok {
        return Err(CompileError::NotAnError);
    }
    let undefined = undefined_identifiers(result);
    if undefined.iter().any(|u| u == "T") {
        return Ok(ErrorCategory::UndefinedGenericT);
    }
    let tree = syntax::parse(source, language).ok();
    let root = tree.as_ref().map(|t| t.root_node());
    if let Some(root) = root {
        if undefined.iter().any(|u| occurrences(root, source, u).into_iter().any(|n| used_as_bound(n) && !is_callee(n))) {
            return Ok(ErrorCategory::MissingVariableInit);
        }
    }
    let messages: Vec<&str> = result.errors().map(|d| d.message.as_str()).collect();
    let c_family = language != Language::Fortran;
    if (c_family && !unclosed_delimiters(source).is_empty())
        || messages.iter().any(|m| BRACE_MESSAGES.iter().any(|b| m.contains(b)))
    {
        return Ok(ErrorCategory::MissingBraces);
    }
    let undefined_callee = root.is_some_and(|root| {
        undefined.iter().any(|u| occurrences(root, source, u).into_iter().any(is_callee))
    });
    if undefined_callee || messages.iter().any(|m| CALL_MESSAGES.iter().any(|c| m.contains(c))) {
        return Ok(ErrorCategory::WrongFunctionCall);
    }
    Ok(ErrorCategory::Nontrivial)
}
