use std::fmt::Write;

use super::decomp::{DecompKind, Decomposition};
use super::graph::SplGraph;

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

/// Renders the graph as a DOT digraph. Distinguished vertices are drawn as
/// double circles and annotated with their role.
pub fn graph_to_dot(graph: &SplGraph) -> String {
    let b = graph.boundary();
    let mut out = String::from("digraph spl {\n  node [shape=circle];\n");
    for &v in graph.vertices() {
        let roles: Vec<&str> = [(b.s, "S"), (b.t, "T"), (b.b, "B"), (b.c, "C")]
            .into_iter()
            .filter(|(id, _)| *id == v)
            .map(|(_, role)| role)
            .collect();
        if roles.is_empty() {
            writeln!(out, "  {v};").unwrap();
        } else {
            let label = format!("{v} ({})", roles.join(","));
            writeln!(out, "  {v} [label={}, shape=doublecircle, style=bold];", quote(&label)).unwrap();
        }
    }
    for edge in graph.edges() {
        let label: Vec<String> = edge.labels.iter().map(ToString::to_string).collect();
        writeln!(out, "  {} -> {} [label={}];", edge.src, edge.dst, quote(&label.join("; "))).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Renders the decomposition as a tree; each node shows its operation and
/// boundary `(S,T,B,C)`.
pub fn decomposition_to_dot(decomp: &Decomposition) -> String {
    let mut out = String::from("digraph decomposition {\n  node [shape=box];\n");
    for (idx, node) in decomp.nodes().iter().enumerate() {
        let b = node.boundary;
        let label = format!("{}\n({},{},{},{})", node.kind.symbol(), b.s, b.t, b.b, b.c);
        let shape = if node.kind.is_atomic() { "ellipse" } else { "box" };
        writeln!(out, "  n{idx} [label={}, shape={shape}];", quote(&label)).unwrap();
    }
    for (idx, node) in decomp.nodes().iter().enumerate() {
        for child in node.children.iter() {
            writeln!(out, "  n{idx} -> n{};", child.0).unwrap();
        }
        if node.kind == DecompKind::Loop {
            debug_assert_eq!(node.local_edges.len(), 5);
        }
    }
    out.push_str("}\n");
    out
}
