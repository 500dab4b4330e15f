use std::collections::{HashMap, VecDeque};

use super::decomp::{Children, DecompId, DecompKind, DecompNode, Decomposition};
use super::graph::{Boundary, Edge, EdgeKey, EdgeLabel, LabelKind, SplGraph, StmtLabel, VertexId};
use crate::frontend::{Ast, NodeId, Span, Stmt};

/// Union-find over raw vertex ids.
struct Merger {
    parent: Vec<u32>,
}

impl Merger {
    fn fresh(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let grand = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = grand;
            v = grand;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb as usize] = ra;
        }
    }
}

struct RawEdge {
    src: u32,
    dst: u32,
    labels: Vec<EdgeLabel>,
}

#[derive(Clone, Copy)]
struct RawBoundary {
    s: u32,
    t: u32,
    b: u32,
    c: u32,
}

/// A partially built subgraph: its boundary, the raw edges leaving its
/// start vertex (where branch conditions are attached) and its node.
struct Fragment {
    boundary: RawBoundary,
    start_edges: Vec<usize>,
    node: DecompId,
}

struct RawNode {
    kind: DecompKind,
    children: Children,
    boundary: RawBoundary,
    local_edges: Vec<usize>,
    ast: NodeId,
}

struct Builder {
    merger: Merger,
    edges: Vec<RawEdge>,
    nodes: Vec<RawNode>,
}

impl Builder {
    fn fresh_boundary(&mut self) -> RawBoundary {
        RawBoundary { s: self.merger.fresh(), t: self.merger.fresh(), b: self.merger.fresh(), c: self.merger.fresh() }
    }

    fn add_edge(&mut self, src: u32, dst: u32, labels: Vec<EdgeLabel>) -> usize {
        self.edges.push(RawEdge { src, dst, labels });
        self.edges.len() - 1
    }

    fn add_node(
        &mut self,
        kind: DecompKind,
        children: Children,
        boundary: RawBoundary,
        local_edges: Vec<usize>,
        ast: NodeId,
    ) -> DecompId {
        self.nodes.push(RawNode { kind, children, boundary, local_edges, ast });
        DecompId(self.nodes.len() as u32 - 1)
    }

    fn atomic(&mut self, kind: DecompKind, label: EdgeLabel, ast: NodeId) -> Fragment {
        let boundary = self.fresh_boundary();
        let dst = match kind {
            DecompKind::AtomicEps => boundary.t,
            DecompKind::AtomicBreak => boundary.b,
            _ => boundary.c,
        };
        let edge = self.add_edge(boundary.s, dst, vec![label]);
        let node = self.add_node(kind, Children::None, boundary, vec![edge], ast);
        Fragment { boundary, start_edges: vec![edge], node }
    }
}

/// Builds the control-flow graph of `ast` together with its grammatical
/// decomposition, which mirrors the syntax tree node for node.
///
/// Runs in time linear in the size of the tree. Vertices are numbered from 1
/// in breadth-first order from the entry, following edges in creation
/// order; vertices unreachable from the entry come last.
pub fn cfg_of(ast: &Ast) -> (SplGraph, Decomposition) {
    let mut builder = Builder { merger: Merger { parent: Vec::new() }, edges: Vec::new(), nodes: Vec::new() };
    let mut fragments: Vec<Option<Fragment>> = Vec::with_capacity(ast.len());
    for (id, node) in ast.nodes() {
        let span = node.span;
        let mut take = |child: &NodeId| fragments[child.index()].take().expect("child fragment built before parent");
        let fragment = match &node.stmt {
            Stmt::Skip => builder.atomic(DecompKind::AtomicEps, label(StmtLabel::Skip, span), id),
            Stmt::Assign { target, expr } => builder.atomic(
                DecompKind::AtomicEps,
                label(StmtLabel::Assign { target: target.clone(), expr: expr.clone() }, span),
                id,
            ),
            Stmt::Break => builder.atomic(DecompKind::AtomicBreak, label(StmtLabel::Break, span), id),
            Stmt::Continue => builder.atomic(DecompKind::AtomicContinue, label(StmtLabel::Continue, span), id),
            Stmt::Seq { left, right } => {
                let (first, second) = (take(left), take(right));
                let (b1, b2) = (first.boundary, second.boundary);
                builder.merger.union(b1.t, b2.s);
                builder.merger.union(b1.b, b2.b);
                builder.merger.union(b1.c, b2.c);
                let boundary = RawBoundary { s: b1.s, t: b2.t, b: b1.b, c: b1.c };
                let node =
                    builder.add_node(DecompKind::Series, Children::Two(first.node, second.node), boundary, vec![], id);
                Fragment { boundary, start_edges: first.start_edges, node }
            }
            Stmt::If { cond, then_branch, else_branch } => {
                let (then_frag, else_frag) = (take(then_branch), take(else_branch));
                for (frag, taken) in [(&then_frag, true), (&else_frag, false)] {
                    for &edge in &frag.start_edges {
                        builder.edges[edge]
                            .labels
                            .push(EdgeLabel::new(LabelKind::Cond { expr: cond.clone(), taken }, span));
                    }
                }
                let (b1, b2) = (then_frag.boundary, else_frag.boundary);
                builder.merger.union(b1.s, b2.s);
                builder.merger.union(b1.t, b2.t);
                builder.merger.union(b1.b, b2.b);
                builder.merger.union(b1.c, b2.c);
                let node = builder.add_node(
                    DecompKind::Parallel,
                    Children::Two(then_frag.node, else_frag.node),
                    b1,
                    vec![],
                    id,
                );
                let mut start_edges = then_frag.start_edges;
                start_edges.extend(else_frag.start_edges);
                Fragment { boundary: b1, start_edges, node }
            }
            Stmt::While { cond, body } => {
                let inner = take(body);
                let outer = builder.fresh_boundary();
                let cond_label = |taken| EdgeLabel::new(LabelKind::Cond { expr: cond.clone(), taken }, span);
                let ib = inner.boundary;
                let frame = [
                    builder.add_edge(outer.s, ib.s, vec![cond_label(true)]),
                    builder.add_edge(outer.s, outer.t, vec![cond_label(false)]),
                    builder.add_edge(ib.t, outer.s, vec![EdgeLabel::new(LabelKind::LoopBack, span)]),
                    builder.add_edge(ib.c, outer.s, vec![EdgeLabel::new(LabelKind::LoopBack, span)]),
                    builder.add_edge(ib.b, outer.t, vec![EdgeLabel::new(LabelKind::LoopExitStub, span)]),
                ];
                let node = builder.add_node(DecompKind::Loop, Children::One(inner.node), outer, frame.to_vec(), id);
                Fragment { boundary: outer, start_edges: frame[..2].to_vec(), node }
            }
        };
        fragments.push(Some(fragment));
    }
    let root = fragments[ast.root().index()].take().expect("root fragment");
    builder.finish(root)
}

fn label(stmt: StmtLabel, span: Span) -> EdgeLabel {
    EdgeLabel::new(LabelKind::Stmt(stmt), span)
}

impl Builder {
    fn finish(mut self, root: Fragment) -> (SplGraph, Decomposition) {
        let raw_count = self.merger.parent.len();
        let rep: Vec<u32> = (0..raw_count as u32).map(|v| self.merger.find(v)).collect();

        let raw_keys: Vec<(u32, u32)> = self.edges.iter().map(|e| (e.src, e.dst)).collect();

        // merge parallel raw edges, keeping first-occurrence order
        let mut merged: Vec<(u32, u32, Vec<EdgeLabel>)> = Vec::new();
        let mut by_key: HashMap<(u32, u32), usize> = HashMap::new();
        for edge in std::mem::take(&mut self.edges) {
            let key = (rep[edge.src as usize], rep[edge.dst as usize]);
            match by_key.get(&key) {
                Some(&i) => merged[i].2.extend(edge.labels),
                None => {
                    by_key.insert(key, merged.len());
                    merged.push((key.0, key.1, edge.labels));
                }
            }
        }

        let mut succ: HashMap<u32, Vec<u32>> = HashMap::new();
        for (src, dst, _) in &merged {
            succ.entry(*src).or_default().push(*dst);
        }

        let mut number: Vec<u32> = vec![0; raw_count];
        let mut order: Vec<u32> = Vec::new();
        let assign = |v: u32, number: &mut Vec<u32>, order: &mut Vec<u32>| -> bool {
            if number[v as usize] == 0 {
                order.push(v);
                number[v as usize] = order.len() as u32;
                true
            } else {
                false
            }
        };
        let start = rep[root.boundary.s as usize];
        let mut queue = VecDeque::from([start]);
        assign(start, &mut number, &mut order);
        while let Some(v) = queue.pop_front() {
            for &w in succ.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if assign(w, &mut number, &mut order) {
                    queue.push_back(w);
                }
            }
        }
        for &r in &rep {
            assign(r, &mut number, &mut order);
        }

        let vid = |raw: u32| VertexId(number[rep[raw as usize] as usize]);
        let vertices: Vec<VertexId> = (1..=order.len() as u32).map(VertexId).collect();
        let edges: Vec<Edge> =
            merged.into_iter().map(|(src, dst, labels)| Edge { src: vid(src), dst: vid(dst), labels }).collect();
        let map_boundary = |b: RawBoundary| Boundary { s: vid(b.s), t: vid(b.t), b: vid(b.b), c: vid(b.c) };
        let graph = SplGraph::assemble(vertices, edges, map_boundary(root.boundary));

        let mut nodes: Vec<DecompNode> = Vec::with_capacity(self.nodes.len());
        for raw in std::mem::take(&mut self.nodes) {
            let boundary = map_boundary(raw.boundary);
            let local_edges: Vec<EdgeKey> =
                raw.local_edges.iter().map(|&i| raw_keys[i]).map(|(s, d)| (vid(s), vid(d))).collect();
            let (boundary_edges, vertex_count) = match raw.children {
                Children::None => (local_edges.clone(), 4),
                Children::One(child) => {
                    let inner = &nodes[child.index()];
                    let edges = local_edges
                        .iter()
                        .copied()
                        .filter(|(s, d)| boundary.contains(*s) && boundary.contains(*d))
                        .collect();
                    (edges, inner.vertex_count + 4)
                }
                Children::Two(a, b) => {
                    let (left, right) = (&nodes[a.index()], &nodes[b.index()]);
                    let mut edges: Vec<EdgeKey> = Vec::new();
                    for key in left.boundary_edges.iter().chain(&right.boundary_edges) {
                        if boundary.contains(key.0) && boundary.contains(key.1) && !edges.contains(key) {
                            edges.push(*key);
                        }
                    }
                    let shared = if raw.kind == DecompKind::Series { 3 } else { 4 };
                    (edges, left.vertex_count + right.vertex_count - shared)
                }
            };
            nodes.push(DecompNode {
                kind: raw.kind,
                children: raw.children,
                boundary,
                local_edges,
                boundary_edges,
                vertex_count,
                ast: raw.ast,
            });
        }
        (graph, Decomposition::from_nodes(nodes))
    }
}
