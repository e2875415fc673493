use std::fmt::Write;

use finhors::{Derivation, TermStore};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering with one node per judgment and the rule that
/// produced a judgment written on the edges to its premisses.
pub fn derivation_to_dot(store: &TermStore, d: &Derivation) -> String {
    let mut out = String::from("digraph derivation {\n  node [shape=box, fontname=\"monospace\"];\n");
    let mut next = 0usize;
    let mut stack = vec![(d, None::<(usize, String)>)];
    while let Some((node, parent)) = stack.pop() {
        let id = next;
        next += 1;
        let j = &node.conclusion;
        let label = format!(
            "{} ⊢ {} : {} ▷ {}",
            j.env,
            store.display(j.subject),
            j.fulltype,
            j.counter
        );
        // leaves have no outgoing edge to carry their rule
        let leaf_rule = if node.premisses.is_empty() {
            format!(", xlabel=\"{}\"", node.rule)
        } else {
            String::new()
        };
        let _ = writeln!(out, "  n{id} [label=\"{}\"{leaf_rule}];", escape(&label));
        if let Some((p, rule)) = parent {
            let _ = writeln!(out, "  n{p} -> n{id} [label=\"{rule}\"];");
        }
        for premiss in node.premisses.iter().rev() {
            stack.push((premiss, Some((id, node.rule.to_string()))));
        }
    }
    out.push_str("}\n");
    out
}
