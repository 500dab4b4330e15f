//! Workload generators shared by the benchmarks.

use splc_core::frontend::parse_expr;
use splc_core::gen::{generate, GenConfig};
use splc_core::lospre::{derive_instance, CostK, LospreInstance};
use splc_core::Program;

/// Sizes, in primitive statements, used across the benchmark groups.
pub const SIZES: [usize; 3] = [250, 1000, 4000];

/// A random closed program with `statements` primitive statements.
pub fn source(statements: usize) -> String {
    generate(0xB0B, &GenConfig::with_statements(statements))
}

pub fn program(statements: usize) -> Program {
    Program::parse(&source(statements)).expect("generated programs parse")
}

/// LOSPRE instance for `a + b` with lexicographic (edge, vertex) costs.
pub fn lospre_instance(p: &Program) -> LospreInstance {
    let e = parse_expr("a + b").expect("valid expression");
    derive_instance(&p.graph, &e, CostK::ints(1, 0), CostK::ints(0, 1))
}

/// Small programs whose register allocation tables stay modest.
pub fn ra_program(statements: usize) -> Program {
    let cfg = GenConfig { variables: 4, ..GenConfig::with_statements(statements) };
    Program::parse(&generate(0xB0B, &cfg)).expect("generated programs parse")
}
