use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::frontend::{Expr, Span};

/// Vertex identifier. Ids produced by [`crate::spl::cfg_of`] are dense and start at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge is identified by its ordered endpoint pair.
pub type EdgeKey = (VertexId, VertexId);

/// The four distinguished vertices of an SPL graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Boundary {
    #[serde(rename = "S")]
    pub s: VertexId,
    #[serde(rename = "T")]
    pub t: VertexId,
    #[serde(rename = "B")]
    pub b: VertexId,
    #[serde(rename = "C")]
    pub c: VertexId,
}

impl Boundary {
    pub fn as_array(&self) -> [VertexId; 4] {
        [self.s, self.t, self.b, self.c]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.as_array().contains(&v)
    }

    pub fn map(&self, mut f: impl FnMut(VertexId) -> VertexId) -> Boundary {
        Boundary { s: f(self.s), t: f(self.t), b: f(self.b), c: f(self.c) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtLabel {
    Skip,
    Assign { target: String, expr: Expr },
    Break,
    Continue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelKind {
    Stmt(StmtLabel),
    /// Branch condition; `taken` is false on the edge followed when it fails.
    Cond {
        expr: Expr,
        taken: bool,
    },
    LoopBack,
    LoopExitStub,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabel {
    pub kind: LabelKind,
    pub span: Span,
}

impl EdgeLabel {
    pub fn new(kind: LabelKind, span: Span) -> EdgeLabel {
        EdgeLabel { kind, span }
    }

    pub fn skip(span: Span) -> EdgeLabel {
        EdgeLabel::new(LabelKind::Stmt(StmtLabel::Skip), span)
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LabelKind::Stmt(StmtLabel::Skip) => f.write_str("skip"),
            LabelKind::Stmt(StmtLabel::Assign { target, expr }) => write!(f, "{target} := {expr}"),
            LabelKind::Stmt(StmtLabel::Break) => f.write_str("break"),
            LabelKind::Stmt(StmtLabel::Continue) => f.write_str("continue"),
            LabelKind::Cond { expr, taken: true } => write!(f, "{expr}"),
            LabelKind::Cond { expr, taken: false } => write!(f, "not ({expr})"),
            LabelKind::LoopBack => f.write_str("loop-back"),
            LabelKind::LoopExitStub => f.write_str("loop-exit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub labels: Vec<EdgeLabel>,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        (self.src, self.dst)
    }
}

/// A control-flow graph with distinguished start, terminate, break and
/// continue vertices. Edges form a simple set: parallel statements between
/// the same endpoints share one edge and accumulate labels.
#[derive(Clone, Debug)]
pub struct SplGraph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    boundary: Boundary,
    position: HashMap<VertexId, usize>,
    edge_index: HashMap<EdgeKey, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl SplGraph {
    /// Builds a graph, merging edges with identical endpoints. Vertex order
    /// is kept as given; edge order is first occurrence.
    pub(crate) fn assemble(vertices: Vec<VertexId>, raw_edges: Vec<Edge>, boundary: Boundary) -> SplGraph {
        let position: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        debug_assert_eq!(position.len(), vertices.len(), "duplicate vertex");
        let mut edges: Vec<Edge> = Vec::with_capacity(raw_edges.len());
        let mut edge_index: HashMap<EdgeKey, usize> = HashMap::with_capacity(raw_edges.len());
        for edge in raw_edges {
            match edge_index.get(&edge.key()) {
                Some(&idx) => edges[idx].labels.extend(edge.labels),
                None => {
                    edge_index.insert(edge.key(), edges.len());
                    edges.push(edge);
                }
            }
        }
        let mut succ = vec![Vec::new(); vertices.len()];
        let mut pred = vec![Vec::new(); vertices.len()];
        for (idx, edge) in edges.iter().enumerate() {
            succ[position[&edge.src]].push(idx);
            pred[position[&edge.dst]].push(idx);
        }
        SplGraph { vertices, edges, boundary, position, edge_index, succ, pred }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.position.contains_key(&v)
    }

    /// Dense index of a vertex in `vertices()`.
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.position.get(&v).copied()
    }

    pub fn edge_index(&self, key: EdgeKey) -> Option<usize> {
        self.edge_index.get(&key).copied()
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&Edge> {
        self.edge_index(key).map(|i| &self.edges[i])
    }

    /// Indices of outgoing edges of `v`, in edge order.
    pub fn out_edges(&self, v: VertexId) -> &[usize] {
        self.position(v).map_or(&[], |p| &self.succ[p])
    }

    pub fn in_edges(&self, v: VertexId) -> &[usize] {
        self.position(v).map_or(&[], |p| &self.pred[p])
    }

    pub fn edge_keys(&self) -> BTreeSet<EdgeKey> {
        self.edges.iter().map(Edge::key).collect()
    }

    /// Closed iff no edge enters `B` or `C`.
    pub fn is_closed(&self) -> bool {
        self.in_edges(self.boundary.b).is_empty() && self.in_edges(self.boundary.c).is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().map(|v| v.0).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| [e.src.0, e.dst.0]).collect::<Vec<_>>(),
            "labels": self
                .edges
                .iter()
                .map(|e| e.labels.iter().map(ToString::to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "boundary": self.boundary,
        })
    }
}

/// True iff no edge enters the graph's break or continue vertex.
pub fn is_closed_graph(graph: &SplGraph) -> bool {
    graph.is_closed()
}
