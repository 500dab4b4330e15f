//! Control-flow graphs of structured programs, their series-parallel-loop
//! decompositions, and exact dynamic programs over them.

mod analysis;
pub mod cost;
pub mod frontend;
pub mod gen;
pub mod liveness;
pub mod lospre;
pub mod oracle;
pub mod regalloc;
pub mod spl;

pub use analysis::Program;
pub use cost::{Cost, Rational};
pub use frontend::{check_closed, parse, Ast, Expr, Stmt, SyntaxError};
pub use spl::{cfg_of, Decomposition, SplGraph, VertexId};
