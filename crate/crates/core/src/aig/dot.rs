//! Graphviz output for debugging. Dashed edges are complemented.

use std::fmt::Write as _;

use super::{AigManager, Node, NodeRef};

pub fn write_dot(mgr: &AigManager, outputs: &[(String, NodeRef)]) -> String {
    let roots: Vec<NodeRef> = outputs.iter().map(|(_, r)| *r).collect();
    let mut out = String::from("digraph aig {\n  rankdir=BT;\n");
    let edge = |out: &mut String, from: &str, to: NodeRef| {
        let style = if to.is_complemented() { " [style=dashed]" } else { "" };
        let _ = writeln!(out, "  {} -> n{}{};", from, to.index(), style);
    };
    for idx in mgr.cone(&roots) {
        match mgr.nodes[idx as usize] {
            Node::False => {
                let _ = writeln!(out, "  n0 [label=\"0\", shape=box];");
            }
            Node::Var(v) => {
                let _ = writeln!(out, "  n{} [label=\"{}\", shape=box];", idx, mgr.display_name(v));
            }
            Node::And(a, b) => {
                let _ = writeln!(out, "  n{} [label=\"∧\", shape=circle];", idx);
                edge(&mut out, &format!("n{}", idx), a);
                edge(&mut out, &format!("n{}", idx), b);
            }
        }
    }
    for (k, (name, r)) in outputs.iter().enumerate() {
        let _ = writeln!(out, "  o{} [label=\"{}\", shape=invtriangle];", k, name);
        edge(&mut out, &format!("o{}", k), *r);
    }
    out.push_str("}\n");
    out
}
