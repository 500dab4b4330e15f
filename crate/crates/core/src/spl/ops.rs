//! The three SPL composition operations on standalone graph values.
//!
//! [`crate::spl::cfg_of`] does not go through these (it merges in place with a
//! union-find); they are the reference definitions used to recompose and
//! check decompositions.

use std::collections::HashMap;

use serde::Serialize;

use super::graph::{Boundary, Edge, EdgeLabel, SplGraph, VertexId};
use super::SplError;

/// Hands out fresh vertex ids for one construction session.
#[derive(Clone, Debug, Default)]
pub struct VertexAllocator {
    next: u32,
}

impl VertexAllocator {
    pub fn new() -> VertexAllocator {
        VertexAllocator::default()
    }

    pub fn starting_at(next: u32) -> VertexAllocator {
        VertexAllocator { next }
    }

    pub fn fresh(&mut self) -> VertexId {
        let id = VertexId(self.next);
        self.next += 1;
        id
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AtomicKind {
    Eps,
    Break,
    Continue,
}

/// One of the three atomic graphs: four fresh vertices and a single edge
/// from `S` to `T`, `B` or `C`.
pub fn atomic(ids: &mut VertexAllocator, kind: AtomicKind, label: EdgeLabel) -> SplGraph {
    let boundary = Boundary { s: ids.fresh(), t: ids.fresh(), b: ids.fresh(), c: ids.fresh() };
    let dst = match kind {
        AtomicKind::Eps => boundary.t,
        AtomicKind::Break => boundary.b,
        AtomicKind::Continue => boundary.c,
    };
    let edge = Edge { src: boundary.s, dst, labels: vec![label] };
    SplGraph::assemble(boundary.as_array().to_vec(), vec![edge], boundary)
}

fn ensure_disjoint(g1: &SplGraph, g2: &SplGraph) -> Result<(), SplError> {
    match g2.vertices().iter().find(|v| g1.contains_vertex(**v)) {
        Some(shared) => Err(SplError::OverlappingOperands(*shared)),
        None => Ok(()),
    }
}

/// Disjoint union of `g1` and `g2` with the vertices of `g2` renamed by
/// `rename`; edges that coincide after renaming are merged.
fn glue(g1: &SplGraph, g2: &SplGraph, rename: &HashMap<VertexId, VertexId>, boundary: Boundary) -> SplGraph {
    let map = |v: VertexId| rename.get(&v).copied().unwrap_or(v);
    let mut vertices = g1.vertices().to_vec();
    vertices.extend(g2.vertices().iter().copied().filter(|v| !rename.contains_key(v)));
    let mut edges = g1.edges().to_vec();
    edges.extend(g2.edges().iter().map(|e| Edge { src: map(e.src), dst: map(e.dst), labels: e.labels.clone() }));
    SplGraph::assemble(vertices, edges, boundary)
}

/// Series composition: identifies `T1 = S2`, `B1 = B2`, `C1 = C2`.
/// The merged vertices keep the ids of `g1`.
pub fn series(g1: &SplGraph, g2: &SplGraph) -> Result<SplGraph, SplError> {
    ensure_disjoint(g1, g2)?;
    let (b1, b2) = (g1.boundary(), g2.boundary());
    let rename = HashMap::from([(b2.s, b1.t), (b2.b, b1.b), (b2.c, b1.c)]);
    let boundary = Boundary { s: b1.s, t: b2.t, b: b1.b, c: b1.c };
    Ok(glue(g1, g2, &rename, boundary))
}

/// Parallel composition: identifies all four distinguished pairs.
pub fn parallel(g1: &SplGraph, g2: &SplGraph) -> Result<SplGraph, SplError> {
    ensure_disjoint(g1, g2)?;
    let (b1, b2) = (g1.boundary(), g2.boundary());
    let rename = HashMap::from([(b2.s, b1.s), (b2.t, b1.t), (b2.b, b1.b), (b2.c, b1.c)]);
    Ok(glue(g1, g2, &rename, b1))
}

/// Labels for the two condition edges of a loop frame.
#[derive(Clone, Debug, Default)]
pub struct LoopLabels {
    pub enter: Vec<EdgeLabel>,
    pub exit: Vec<EdgeLabel>,
    pub back: Vec<EdgeLabel>,
    pub break_out: Vec<EdgeLabel>,
}

/// Loop composition: four fresh distinguished vertices and the edges
/// `(S,S1) (S,T) (T1,S) (C1,S) (B1,T)`.
pub fn loop_graph(ids: &mut VertexAllocator, g1: &SplGraph, labels: LoopLabels) -> SplGraph {
    let inner = g1.boundary();
    let boundary = Boundary { s: ids.fresh(), t: ids.fresh(), b: ids.fresh(), c: ids.fresh() };
    let mut vertices = g1.vertices().to_vec();
    vertices.extend(boundary.as_array());
    let mut edges = g1.edges().to_vec();
    let frame = loop_frame(boundary, inner);
    let frame_labels = [labels.enter, labels.exit, labels.back.clone(), labels.back, labels.break_out];
    edges.extend(frame.into_iter().zip(frame_labels).map(|((src, dst), labels)| Edge { src, dst, labels }));
    SplGraph::assemble(vertices, edges, boundary)
}

/// The five edges a loop node adds, in the order
/// `(S,S1) (S,T) (T1,S) (C1,S) (B1,T)`.
pub fn loop_frame(outer: Boundary, inner: Boundary) -> [(VertexId, VertexId); 5] {
    [(outer.s, inner.s), (outer.s, outer.t), (inner.t, outer.s), (inner.c, outer.s), (inner.b, outer.t)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Span;

    fn label() -> EdgeLabel {
        EdgeLabel::skip(Span::default())
    }

    fn eps(ids: &mut VertexAllocator) -> SplGraph {
        atomic(ids, AtomicKind::Eps, label())
    }

    #[test]
    fn atomic_graphs_have_one_edge_each() {
        let mut ids = VertexAllocator::new();
        for (kind, pick) in [(AtomicKind::Eps, 1usize), (AtomicKind::Break, 2), (AtomicKind::Continue, 3)] {
            let g = atomic(&mut ids, kind, label());
            let b = g.boundary().as_array();
            assert_eq!(g.vertex_count(), 4);
            assert_eq!(g.edge_keys().into_iter().collect::<Vec<_>>(), vec![(b[0], b[pick])]);
        }
    }

    #[test]
    fn series_of_two_eps() {
        let mut ids = VertexAllocator::new();
        let (g1, g2) = (eps(&mut ids), eps(&mut ids));
        let g = series(&g1, &g2).unwrap();
        let m = g1.boundary().t;
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_keys(), [(g1.boundary().s, m), (m, g2.boundary().t)].into());
        assert_eq!(g.boundary().s, g1.boundary().s);
        assert_eq!(g.boundary().t, g2.boundary().t);
    }

    #[test]
    fn series_keeps_break_edge_pointing_at_merged_b() {
        let mut ids = VertexAllocator::new();
        let g1 = atomic(&mut ids, AtomicKind::Break, label());
        let g2 = eps(&mut ids);
        let g = series(&g1, &g2).unwrap();
        let (s1, m, b) = (g1.boundary().s, g1.boundary().t, g.boundary().b);
        assert_eq!(g.edge_keys(), [(s1, b), (m, g2.boundary().t)].into());
    }

    #[test]
    fn series_of_two_breaks_keeps_both_edges() {
        let mut ids = VertexAllocator::new();
        let g1 = atomic(&mut ids, AtomicKind::Break, label());
        let g2 = atomic(&mut ids, AtomicKind::Break, label());
        let g = series(&g1, &g2).unwrap();
        let (s1, m, b) = (g1.boundary().s, g1.boundary().t, g.boundary().b);
        assert_eq!(g.edge_keys(), [(s1, b), (m, b)].into());
        assert_eq!(g.vertex_count(), 5);
    }

    #[test]
    fn parallel_collapses_duplicate_edges_and_unions_labels() {
        let mut ids = VertexAllocator::new();
        let (g1, g2) = (eps(&mut ids), eps(&mut ids));
        let g = parallel(&g1, &g2).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].labels.len(), 2);
    }

    #[test]
    fn parallel_break_continue() {
        let mut ids = VertexAllocator::new();
        let g1 = atomic(&mut ids, AtomicKind::Break, label());
        let g2 = atomic(&mut ids, AtomicKind::Continue, label());
        let g = parallel(&g1, &g2).unwrap();
        let b = g.boundary();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_keys(), [(b.s, b.b), (b.s, b.c)].into());
    }

    #[test]
    fn parallel_figure_example_merges_the_shared_break_edge() {
        // operand 1: S->M1, S->B, M1->T ; operand 2: S->M2, S->B, M2->T, M2->C
        let mut ids = VertexAllocator::new();
        let left =
            series(&parallel(&eps(&mut ids), &atomic(&mut ids, AtomicKind::Break, label())).unwrap(), &eps(&mut ids))
                .unwrap();
        let right = series(
            &parallel(&eps(&mut ids), &atomic(&mut ids, AtomicKind::Break, label())).unwrap(),
            &parallel(&eps(&mut ids), &atomic(&mut ids, AtomicKind::Continue, label())).unwrap(),
        )
        .unwrap();
        assert_eq!((left.vertex_count(), right.vertex_count()), (5, 5));
        let g = parallel(&left, &right).unwrap();
        let b = g.boundary();
        let sb: Vec<_> = g.edges().iter().filter(|e| e.key() == (b.s, b.b)).collect();
        assert_eq!(sb.len(), 1);
        assert_eq!(sb[0].labels.len(), 2);
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn loop_adds_four_vertices_and_five_edges() {
        let mut ids = VertexAllocator::new();
        let body = eps(&mut ids);
        let g = loop_graph(&mut ids, &body, LoopLabels::default());
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 6));
        let gg = loop_graph(&mut ids, &g, LoopLabels::default());
        assert_eq!((gg.vertex_count(), gg.edge_count()), (12, 11));
    }

    #[test]
    fn loop_over_six_vertex_operand() {
        let mut ids = VertexAllocator::new();
        let body = parallel(
            &series(&eps(&mut ids), &atomic(&mut ids, AtomicKind::Break, label())).unwrap(),
            &series(&eps(&mut ids), &atomic(&mut ids, AtomicKind::Continue, label())).unwrap(),
        )
        .unwrap();
        assert_eq!(body.vertex_count(), 6);
        let before = body.edge_keys();
        let g = loop_graph(&mut ids, &body, LoopLabels::default());
        assert_eq!(g.vertex_count(), 10);
        assert!(before.is_subset(&g.edge_keys()));
        assert_eq!(g.edge_count(), before.len() + 5);
    }

    #[test]
    fn overlapping_operands_are_rejected() {
        let mut ids = VertexAllocator::new();
        let g = eps(&mut ids);
        assert!(matches!(series(&g, &g), Err(SplError::OverlappingOperands(_))));
        assert!(matches!(parallel(&g, &g), Err(SplError::OverlappingOperands(_))));
    }
}
