// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::graph::{EdgeKind, Graph, NodeRole};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_attrs(role: &NodeRole) -> &'static str {
    match role {
        NodeRole::Input => "shape=invhouse",
        NodeRole::Constant => "shape=plaintext",
        NodeRole::Memory => "shape=cylinder",
        NodeRole::Op(_) => "shape=ellipse",
        NodeRole::Output => "shape=house",
        NodeRole::Tag { .. } => "shape=note, color=gray40, fontcolor=gray40",
        NodeRole::TagOp { .. } => "shape=diamond, color=gray40, fontcolor=gray40",
        NodeRole::Boundary => "shape=diamond, color=gray40",
        NodeRole::Monitor => "shape=box, peripheries=2, style=bold",
    }
}

/// Renders a graph as a DOT digraph. Nodes and edges are written in graph
/// order, so identical graphs render to identical bytes.
pub fn emit_dot(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&g.name)).unwrap();
    writeln!(out, "  rankdir=TB;").unwrap();
    writeln!(out, "  node [fontname=\"monospace\"];").unwrap();
    for n in &g.nodes {
        writeln!(
            out,
            "  {} [label={}, {}];",
            quote(&n.id),
            quote(&n.label),
            node_attrs(&n.role)
        )
        .unwrap();
    }
    for e in &g.edges {
        let mut attrs = Vec::new();
        match e.kind {
            EdgeKind::Value => {}
            EdgeKind::Tag => attrs.push("style=dashed, color=gray40".to_string()),
            EdgeKind::Monitor => attrs.push("style=dashed, color=red".to_string()),
        }
        if let Some(l) = &e.label {
            attrs.push(format!("label={}", quote(l)));
        }
        if attrs.is_empty() {
            writeln!(out, "  {} -> {};", quote(&e.from), quote(&e.to)).unwrap();
        } else {
            writeln!(out, "  {} -> {} [{}];", quote(&e.from), quote(&e.to), attrs.join(", ")).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
