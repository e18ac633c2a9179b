//! Def-use edges over variable identifiers.
//!
//! Each assignment-like definition yields `(v, computedFrom, uses)`, and each
//! use of a variable defined somewhere in the same function yields
//! `(u, comesFrom, [u])`. Variable names are renamed `var_0, var_1, ...` in
//! order of first appearance so the edges do not depend on naming.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use tree_sitter::Node;

use crate::lang::Language;
use crate::syntax::{field_name, preorder};

pub const COMPUTED_FROM: &str = "computedFrom";
pub const COMES_FROM: &str = "comesFrom";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub var: String,
    pub relation: &'static str,
    pub parents: Vec<String>,
}

struct Def<'t> {
    target: Node<'t>,
    value: Option<Node<'t>>,
    self_use: bool,
}

fn scope_kinds(lang: Language) -> &'static [&'static str] {
    match lang {
        Language::Cpp | Language::Cuda => &["function_definition", "lambda_expression"],
        Language::Fortran => &["subroutine", "function", "program", "module_procedure"],
    }
}

fn is_variable(node: Node<'_>) -> bool {
    if node.kind() != "identifier" {
        return false;
    }
    let Some(parent) = node.parent() else { return true };
    let field = field_name(node);
    !matches!(
        (parent.kind(), field),
        ("function_declarator", Some("declarator"))
            | ("call_expression", Some("function"))
            | ("template_function", Some("name"))
            | ("qualified_identifier", _)
            | ("preproc_def", _)
            | ("preproc_function_def", _)
            | ("preproc_params", _)
            | ("subroutine_call", Some("subroutine"))
    )
}

/// The identifier a declarator or lvalue ultimately names.
fn base_identifier(mut node: Node<'_>) -> Option<Node<'_>> {
    loop {
        if node.kind() == "identifier" {
            return Some(node);
        }
        node = match node.kind() {
            "pointer_declarator" | "array_declarator" | "reference_declarator" | "parenthesized_declarator"
            | "init_declarator" => node.child_by_field_name("declarator").or_else(|| node.named_child(0))?,
            "subscript_expression" | "field_expression" | "pointer_expression" => {
                node.child_by_field_name("argument")?
            }
            "parenthesized_expression" | "call_expression" | "sized_declarator" | "derived_type_member_expression" => {
                node.named_child(0)?
            }
            _ => return None,
        };
    }
}

fn definitions<'t>(root: Node<'t>, lang: Language) -> Vec<Def<'t>> {
    let mut defs = Vec::new();
    let mut push = |target: Option<Node<'t>>, value: Option<Node<'t>>, self_use: bool| {
        if let Some(t) = target.filter(|t| is_variable(*t)) {
            defs.push(Def { target: t, value, self_use });
        }
    };
    for node in preorder(root) {
        let fortran = lang == Language::Fortran;
        match node.kind() {
            "init_declarator" if fortran => {
                push(node.child_by_field_name("left"), node.child_by_field_name("right"), false)
            }
            "init_declarator" => push(
                node.child_by_field_name("declarator").and_then(base_identifier),
                node.child_by_field_name("value"),
                false,
            ),
            "declaration" | "parameter_declaration" | "optional_parameter_declaration" | "variable_declaration" => {
                let mut c = node.walk();
                for d in node.children_by_field_name("declarator", &mut c) {
                    if d.kind() != "init_declarator" {
                        let value = node.child_by_field_name("default_value");
                        push(base_identifier(d), value, false);
                    }
                }
            }
            "for_range_loop" => push(
                node.child_by_field_name("declarator").and_then(base_identifier),
                node.child_by_field_name("right"),
                false,
            ),
            "assignment_expression" => {
                let op = node.child_by_field_name("operator").map(|o| o.kind()).unwrap_or("=");
                push(
                    node.child_by_field_name("left").and_then(base_identifier),
                    node.child_by_field_name("right"),
                    op != "=",
                )
            }
            "update_expression" => {
                push(node.child_by_field_name("argument").and_then(base_identifier), None, true)
            }
            "assignment_statement" => push(
                node.child_by_field_name("left").and_then(base_identifier),
                node.child_by_field_name("right"),
                false,
            ),
            "parameters" if fortran => {
                let mut c = node.walk();
                for p in node.named_children(&mut c) {
                    push(Some(p), None, false);
                }
            }
            "loop_control_expression" => push(node.named_child(0), Some(node), false),
            _ => {}
        }
    }
    defs
}

/// Def-use edges of a parsed program.
pub fn dataflow_edges(root: Node<'_>, source: &str, lang: Language) -> Vec<Edge> {
    let text = |n: Node<'_>| {
        let t = &source[n.byte_range()];
        if lang.case_insensitive() {
            t.to_ascii_lowercase()
        } else {
            t.to_string()
        }
    };

    // Variable occurrences in source order with their enclosing scope.
    let scopes = scope_kinds(lang);
    let mut occurrences: Vec<(Node<'_>, usize)> = Vec::new();
    let mut scope_of_node: Vec<(std::ops::Range<usize>, usize)> = Vec::new();
    for node in preorder(root) {
        if scopes.contains(&node.kind()) {
            scope_of_node.push((node.byte_range(), node.id()));
        }
        if is_variable(node) {
            let scope = scope_of_node
                .iter()
                .rev()
                .find(|(r, _)| r.start <= node.start_byte() && node.end_byte() <= r.end)
                .map_or(root.id(), |&(_, id)| id);
            occurrences.push((node, scope));
        }
    }

    let mut names: HashMap<String, String> = HashMap::new();
    for &(n, _) in &occurrences {
        let len = names.len();
        names.entry(text(n)).or_insert_with(|| format!("var_{len}"));
    }
    let norm = |n: Node<'_>| names[&text(n)].clone();
    let scope_of: HashMap<usize, usize> = occurrences.iter().map(|&(n, s)| (n.id(), s)).collect();

    let defs = definitions(root, lang);
    let targets: HashSet<usize> = defs.iter().map(|d| d.target.id()).collect();
    let defined: HashSet<(usize, String)> = defs.iter().map(|d| (scope_of[&d.target.id()], text(d.target))).collect();

    let mut edges = Vec::new();
    for d in &defs {
        if d.value.is_none() && !d.self_use {
            continue;
        }
        let mut parents: BTreeSet<String> = BTreeSet::new();
        if let Some(v) = d.value {
            for &(n, _) in &occurrences {
                if n.id() != d.target.id() && v.start_byte() <= n.start_byte() && n.end_byte() <= v.end_byte() {
                    parents.insert(norm(n));
                }
            }
        }
        if d.self_use {
            parents.insert(norm(d.target));
        }
        edges.push(Edge { var: norm(d.target), relation: COMPUTED_FROM, parents: parents.into_iter().collect() });
    }
    for &(n, scope) in &occurrences {
        if !targets.contains(&n.id()) && defined.contains(&(scope, text(n))) {
            let v = norm(n);
            edges.push(Edge { var: v.clone(), relation: COMES_FROM, parents: vec![v] });
        }
    }
    edges
}

/// Share of reference edges matched in the hypothesis (multiset intersection), in [0, 100].
pub fn dataflow_match(hyp: &[Edge], reference: &[Edge]) -> f64 {
    if reference.is_empty() {
        return if hyp.is_empty() { 100.0 } else { 0.0 };
    }
    let mut avail: BTreeMap<&Edge, usize> = BTreeMap::new();
    for e in hyp {
        *avail.entry(e).or_insert(0) += 1;
    }
    let mut matched = 0usize;
    for e in reference {
        if let Some(c) = avail.get_mut(e) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    100.0 * matched as f64 / reference.len() as f64
}
