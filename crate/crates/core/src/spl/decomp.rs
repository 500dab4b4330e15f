use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::graph::{Boundary, EdgeKey, SplGraph, VertexId};
use super::ops::{self, AtomicKind, LoopLabels, VertexAllocator};
use crate::frontend::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DecompId(pub u32);

impl DecompId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DecompKind {
    AtomicEps,
    AtomicBreak,
    AtomicContinue,
    Series,
    Parallel,
    Loop,
}

impl DecompKind {
    pub fn is_atomic(self) -> bool {
        matches!(self, DecompKind::AtomicEps | DecompKind::AtomicBreak | DecompKind::AtomicContinue)
    }

    pub fn atomic_kind(self) -> Option<AtomicKind> {
        match self {
            DecompKind::AtomicEps => Some(AtomicKind::Eps),
            DecompKind::AtomicBreak => Some(AtomicKind::Break),
            DecompKind::AtomicContinue => Some(AtomicKind::Continue),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DecompKind::AtomicEps => "A_eps",
            DecompKind::AtomicBreak => "A_break",
            DecompKind::AtomicContinue => "A_continue",
            DecompKind::Series => "series (;)",
            DecompKind::Parallel => "parallel (||)",
            DecompKind::Loop => "loop (*)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Children {
    None,
    One(DecompId),
    Two(DecompId, DecompId),
}

impl Children {
    pub fn iter(&self) -> impl Iterator<Item = DecompId> {
        let (a, b) = match *self {
            Children::None => (None, None),
            Children::One(a) => (Some(a), None),
            Children::Two(a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }
}

/// One node of the grammatical decomposition.
///
/// `local_edges` are the edges this node introduces: the single edge of an
/// atomic graph or the five frame edges of a loop (in `(S,S1) (S,T) (T1,S)
/// (C1,S) (B1,T)` order). The node's full edge set is the union of local
/// edges over its subtree; see [`Decomposition::edges_of`].
#[derive(Clone, Debug)]
pub struct DecompNode {
    pub kind: DecompKind,
    pub children: Children,
    pub boundary: Boundary,
    pub local_edges: Vec<EdgeKey>,
    /// Edges of the subtree whose endpoints are both distinguished vertices
    /// of this node. Edges shared between two children always live here.
    pub boundary_edges: Vec<EdgeKey>,
    pub vertex_count: usize,
    pub ast: NodeId,
}

/// Parse tree of an SPL graph. Nodes are stored children-first, so
/// iterating in index order is a bottom-up traversal; the root is last.
#[derive(Clone, Debug)]
pub struct Decomposition {
    nodes: Vec<DecompNode>,
}

impl Decomposition {
    pub(crate) fn from_nodes(nodes: Vec<DecompNode>) -> Decomposition {
        assert!(!nodes.is_empty(), "a decomposition has at least one node");
        Decomposition { nodes }
    }

    pub fn root(&self) -> DecompId {
        DecompId(self.nodes.len() as u32 - 1)
    }

    pub fn node(&self, id: DecompId) -> &DecompNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[DecompNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = DecompId> {
        (0..self.nodes.len() as u32).map(DecompId)
    }

    /// Node ids of the subtree rooted at `id`, parents before children.
    pub fn subtree(&self, id: DecompId) -> Vec<DecompId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(current) = stack.pop() {
            out.push(current);
            stack.extend(self.node(current).children.iter());
        }
        out
    }

    /// The full edge set `E_u` of the subgraph at `id`.
    pub fn edges_of(&self, id: DecompId) -> BTreeSet<EdgeKey> {
        self.subtree(id).into_iter().flat_map(|n| self.node(n).local_edges.iter().copied()).collect()
    }

    /// The full vertex set `V_u` of the subgraph at `id`.
    pub fn vertices_of(&self, id: DecompId) -> BTreeSet<VertexId> {
        self.subtree(id).into_iter().flat_map(|n| self.node(n).boundary.as_array()).collect()
    }

    /// Compact constructor-style rendering, e.g. `Loop(Parallel(Series(A_eps,A_break),...))`.
    pub fn outline(&self) -> String {
        let mut text: Vec<String> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let name = match node.kind {
                DecompKind::AtomicEps => "A_eps",
                DecompKind::AtomicBreak => "A_break",
                DecompKind::AtomicContinue => "A_continue",
                DecompKind::Series => "Series",
                DecompKind::Parallel => "Parallel",
                DecompKind::Loop => "Loop",
            };
            let parts: Vec<String> = node.children.iter().map(|c| std::mem::take(&mut text[c.index()])).collect();
            text.push(if parts.is_empty() { name.to_string() } else { format!("{name}({})", parts.join(",")) });
        }
        text.pop().unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let mut built: Vec<serde_json::Value> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let children: Vec<serde_json::Value> =
                node.children.iter().map(|c| std::mem::take(&mut built[c.index()])).collect();
            built.push(json!({
                "kind": node.kind,
                "boundary": node.boundary,
                "edges": node.local_edges.iter().map(|(s, d)| [s.0, d.0]).collect::<Vec<_>>(),
                "children": children,
            }));
        }
        built.pop().unwrap_or(serde_json::Value::Null)
    }

    /// Re-derives the graph from the tree with the reference composition
    /// operations and checks it against `graph`.
    ///
    /// Every node is rebuilt on fresh vertices; the checker tracks which
    /// canonical vertex each fresh vertex stands for and fails if a merge
    /// performed by an operation disagrees with the stored ids, if two
    /// distinct fresh vertices land on the same id, or if the final vertex
    /// set, edge set or boundary differ. Quadratic in the tree height, so
    /// meant for tests and small programs.
    pub fn verify(&self, graph: &SplGraph) -> Result<(), String> {
        let mut ids = VertexAllocator::new();
        let mut built: Vec<Option<(SplGraph, HashMap<VertexId, VertexId>)>> = Vec::with_capacity(self.nodes.len());
        for (idx, node) in self.nodes.iter().enumerate() {
            let (rebuilt, mapping) = match node.children {
                Children::None => {
                    let kind = node.kind.atomic_kind().ok_or_else(|| format!("node {idx}: leaf is not atomic"))?;
                    let [(src, dst)] = node.local_edges[..] else {
                        return Err(format!("node {idx}: atomic node must own exactly one edge"));
                    };
                    let label = graph
                        .edge((src, dst))
                        .and_then(|e| e.labels.first().cloned())
                        .ok_or_else(|| format!("node {idx}: edge {src}->{dst} missing from graph"))?;
                    let g = ops::atomic(&mut ids, kind, label);
                    let mapping: HashMap<_, _> =
                        g.boundary().as_array().into_iter().zip(node.boundary.as_array()).collect();
                    (g, mapping)
                }
                Children::One(child) => {
                    if node.kind != DecompKind::Loop {
                        return Err(format!("node {idx}: unary node must be a loop"));
                    }
                    let (inner, mut mapping) =
                        built[child.index()].take().ok_or_else(|| format!("node {idx}: child used twice"))?;
                    let g = ops::loop_graph(&mut ids, &inner, LoopLabels::default());
                    for (fresh, canonical) in g.boundary().as_array().into_iter().zip(node.boundary.as_array()) {
                        if mapping.values().any(|v| *v == canonical) {
                            return Err(format!("node {idx}: loop vertex {canonical} already used by its body"));
                        }
                        mapping.insert(fresh, canonical);
                    }
                    (g, mapping)
                }
                Children::Two(left, right) => {
                    let (g1, m1) = built[left.index()].take().ok_or_else(|| format!("node {idx}: child used twice"))?;
                    let (g2, m2) =
                        built[right.index()].take().ok_or_else(|| format!("node {idx}: child used twice"))?;
                    let (b1, b2) = (g1.boundary(), g2.boundary());
                    let (g, merged) = match node.kind {
                        DecompKind::Series => (
                            ops::series(&g1, &g2).map_err(|e| e.to_string())?,
                            vec![(b1.t, b2.s), (b1.b, b2.b), (b1.c, b2.c)],
                        ),
                        DecompKind::Parallel => (
                            ops::parallel(&g1, &g2).map_err(|e| e.to_string())?,
                            vec![(b1.s, b2.s), (b1.t, b2.t), (b1.b, b2.b), (b1.c, b2.c)],
                        ),
                        other => return Err(format!("node {idx}: binary node of kind {other:?}")),
                    };
                    for (kept, dropped) in &merged {
                        if m1[kept] != m2[dropped] {
                            return Err(format!(
                                "node {idx}: {:?} merges vertices stored as {} and {}",
                                node.kind, m1[kept], m2[dropped]
                            ));
                        }
                    }
                    let mut mapping = m1;
                    for (fresh, canonical) in m2 {
                        if !merged.iter().any(|(_, dropped)| *dropped == fresh) {
                            mapping.insert(fresh, canonical);
                        }
                    }
                    (g, mapping)
                }
            };
            let expected = node.boundary;
            if rebuilt.boundary().map(|v| mapping[&v]) != expected {
                return Err(format!("node {idx}: boundary mismatch"));
            }
            if rebuilt.vertex_count() != node.vertex_count {
                return Err(format!(
                    "node {idx}: vertex count {} != stored {}",
                    rebuilt.vertex_count(),
                    node.vertex_count
                ));
            }
            let images: BTreeSet<VertexId> = rebuilt.vertices().iter().map(|v| mapping[v]).collect();
            if images.len() != rebuilt.vertex_count() {
                return Err(format!("node {idx}: distinct vertices collapse onto one id"));
            }
            built.push(Some((rebuilt, mapping)));
        }
        let (rebuilt, mapping) = built.pop().flatten().ok_or("empty decomposition")?;
        let vertices: BTreeSet<VertexId> = rebuilt.vertices().iter().map(|v| mapping[v]).collect();
        if vertices != graph.vertices().iter().copied().collect() {
            return Err("vertex set differs from the graph".into());
        }
        let edges: BTreeSet<EdgeKey> = rebuilt.edges().iter().map(|e| (mapping[&e.src], mapping[&e.dst])).collect();
        if edges != graph.edge_keys() || rebuilt.edge_count() != graph.edge_count() {
            return Err("edge set differs from the graph".into());
        }
        if rebuilt.boundary().map(|v| mapping[&v]) != graph.boundary() {
            return Err("root boundary differs from the graph".into());
        }
        Ok(())
    }
}
