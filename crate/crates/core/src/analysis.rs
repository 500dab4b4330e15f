use crate::frontend::{parse, Ast, SyntaxError};
use crate::liveness::{compute_liveness, interference_graph, lifetimes, InterferenceGraph, Lifetimes, LiveInfo};
use crate::regalloc::RaProblem;
use crate::spl::{cfg_of, Decomposition, SplGraph};

/// A parsed program with its graph, decomposition and liveness facts.
#[derive(Clone, Debug)]
pub struct Program {
    pub ast: Ast,
    pub graph: SplGraph,
    pub decomp: Decomposition,
    pub live: LiveInfo,
    pub lifetimes: Lifetimes,
    pub interference: InterferenceGraph,
}

impl Program {
    pub fn parse(source: &str) -> Result<Program, SyntaxError> {
        Ok(Program::analyse(parse(source)?))
    }

    pub fn analyse(ast: Ast) -> Program {
        let (graph, decomp) = cfg_of(&ast);
        let live = compute_liveness(&graph);
        let lifetimes = lifetimes(&live);
        let interference = interference_graph(&live, &lifetimes);
        Program { ast, graph, decomp, live, lifetimes, interference }
    }

    pub fn ra_problem(&self) -> RaProblem<'_> {
        RaProblem { graph: &self.graph, decomp: &self.decomp, live: &self.live, interference: &self.interference }
    }
}
