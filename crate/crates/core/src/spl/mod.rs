//! Series-parallel-loop graphs: the graph type, the composition operations,
//! CFG construction from a syntax tree and its grammatical decomposition.

mod build;
mod decomp;
mod dot;
mod graph;
mod ops;

use thiserror::Error;

pub use build::cfg_of;
pub use decomp::{Children, DecompId, DecompKind, DecompNode, Decomposition};
pub use dot::{decomposition_to_dot, graph_to_dot};
pub use graph::{is_closed_graph, Boundary, Edge, EdgeKey, EdgeLabel, LabelKind, SplGraph, StmtLabel, VertexId};
pub use ops::{atomic, loop_frame, loop_graph, parallel, series, AtomicKind, LoopLabels, VertexAllocator};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplError {
    #[error("operands share vertex {0}")]
    OverlappingOperands(VertexId),
}
