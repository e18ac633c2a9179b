//! Concrete syntax trees from the tree-sitter grammars for each language.

use tree_sitter::{Node, Parser, Tree};

use crate::lang::Language;

#[derive(Debug, thiserror::Error)]
pub enum SyntaxError {
    #[error("no grammar available for {0}")]
    GrammarMissing(Language),
    #[error("parser produced no tree")]
    NoTree,
}

pub fn grammar(lang: Language) -> tree_sitter::Language {
    match lang {
        Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        Language::Cuda => tree_sitter_cuda::LANGUAGE.into(),
        Language::Fortran => tree_sitter_fortran::LANGUAGE.into(),
    }
}

pub fn parse(source: &str, lang: Language) -> Result<Tree, SyntaxError> {
    let mut parser = Parser::new();
    parser.set_language(&grammar(lang)).map_err(|_| SyntaxError::GrammarMissing(lang))?;
    parser.parse(source, None).ok_or(SyntaxError::NoTree)
}

/// Fraction of source bytes covered by `ERROR` nodes or missing nodes.
pub fn error_fraction(tree: &Tree, source_len: usize) -> f64 {
    if source_len == 0 {
        return 0.0;
    }
    let root = tree.root_node();
    if !root.has_error() {
        return 0.0;
    }
    let mut covered = 0usize;
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if n.is_error() {
            covered += n.end_byte() - n.start_byte();
            continue;
        }
        if n.has_error() {
            let mut c = n.walk();
            stack.extend(n.children(&mut c));
        }
    }
    covered as f64 / source_len as f64
}

/// Pre-order traversal of every node, named and anonymous.
pub fn preorder(root: Node<'_>) -> Vec<Node<'_>> {
    let mut out = Vec::new();
    let mut cursor = root.walk();
    loop {
        out.push(cursor.node());
        if cursor.goto_first_child() {
            continue;
        }
        loop {
            if cursor.goto_next_sibling() {
                break;
            }
            if !cursor.goto_parent() {
                return out;
            }
        }
    }
}

/// Field name under which `node` hangs off its parent, if any.
pub fn field_name<'a>(node: Node<'a>) -> Option<&'a str> {
    let parent = node.parent()?;
    let mut cursor = parent.walk();
    if !cursor.goto_first_child() {
        return None;
    }
    loop {
        if cursor.node().id() == node.id() {
            return cursor.field_name();
        }
        if !cursor.goto_next_sibling() {
            return None;
        }
    }
}

/// Indented dump of a tree; handy when writing mapping rules.
pub fn dump(source: &str, lang: Language) -> Result<String, SyntaxError> {
    let tree = parse(source, lang)?;
    let mut out = String::new();
    for n in preorder(tree.root_node()) {
        let depth = {
            let mut d = 0;
            let mut p = n.parent();
            while let Some(x) = p {
                d += 1;
                p = x.parent();
            }
            d
        };
        let field = field_name(n).map(|f| format!("{f}: ")).unwrap_or_default();
        let text = if n.child_count() == 0 { format!(" {:?}", &source[n.byte_range()]) } else { String::new() };
        out.push_str(&format!("{}{}{}{}\n", "  ".repeat(depth), field, n.kind(), text));
    }
    Ok(out)
}
