use std::collections::HashMap;

use tree_sitter::Node;

/// Leaf-stripped s-expressions of every named node that has children.
pub fn subtrees(root: Node<'_>) -> Vec<String> {
    let mut out = Vec::new();
    collect(root, &mut out);
    out
}

fn collect(node: Node<'_>, out: &mut Vec<String>) -> String {
    let mut s = format!("({}", node.kind());
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        let c = collect(child, out);
        s.push(' ');
        s.push_str(&c);
    }
    s.push(')');
    if node.is_named() && node.child_count() > 0 {
        out.push(s.clone());
    }
    s
}

/// Share of reference subtrees matched in the hypothesis (multiset intersection), in [0, 100].
pub fn ast_match(hyp: &[String], reference: &[String]) -> f64 {
    if reference.is_empty() {
        return if hyp.is_empty() { 100.0 } else { 0.0 };
    }
    let mut avail: HashMap<&str, usize> = HashMap::new();
    for h in hyp {
        *avail.entry(h).or_insert(0) += 1;
    }
    let mut matched = 0usize;
    for r in reference {
        if let Some(c) = avail.get_mut(r.as_str()) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    100.0 * matched as f64 / reference.len() as f64
}
