use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Lifetimes, LiveInfo, VarId, VarTable};

/// Undirected graph on program variables; `u` and `v` are adjacent iff
/// their lifetimes share a vertex or an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceGraph {
    vars: VarTable,
    adjacent: Vec<BTreeSet<VarId>>,
}

impl InterferenceGraph {
    /// Builds the graph from explicit edges, mostly for tests and oracles.
    pub fn from_edges(vars: VarTable, edges: &[(VarId, VarId)]) -> InterferenceGraph {
        let mut adjacent = vec![BTreeSet::new(); vars.len()];
        for &(u, v) in edges {
            if u != v {
                adjacent[u.index()].insert(v);
                adjacent[v.index()].insert(u);
            }
        }
        InterferenceGraph { vars, adjacent }
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.adjacent.len()
    }

    pub fn interferes(&self, u: VarId, v: VarId) -> bool {
        self.adjacent[u.index()].contains(&v)
    }

    pub fn neighbours(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.adjacent[v.index()]
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for (u, set) in self.adjacent.iter().enumerate() {
            let u = VarId(u as u32);
            out.extend(set.iter().filter(|v| u < **v).map(|v| (u, *v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacent.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn edge_names(&self) -> Vec<[&str; 2]> {
        self.edges().into_iter().map(|(u, v)| [self.vars.name(u), self.vars.name(v)]).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph interference {\n");
        for name in self.vars.names() {
            writeln!(out, "  \"{name}\";").unwrap();
        }
        for [u, v] in self.edge_names() {
            writeln!(out, "  \"{u}\" -- \"{v}\";").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Intersects lifetime supports pairwise through the shared live sets.
pub fn interference_graph(info: &LiveInfo, lifetimes: &Lifetimes) -> InterferenceGraph {
    let vars = info.vars().clone();
    let mut adjacent = vec![BTreeSet::new(); vars.len()];
    let supports = info.vertices().map(|(_, s)| s).chain(info.edges().map(|(_, s)| s));
    for set in supports {
        for &u in set {
            adjacent[u.index()].extend(set.iter().copied().filter(|v| *v != u));
        }
    }
    debug_assert!(lifetimes.by_var.keys().all(|v| v.index() < vars.len()));
    InterferenceGraph { vars, adjacent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::liveness::{compute_liveness, lifetimes};
    use crate::spl::cfg_of;

    fn graph_of(src: &str) -> InterferenceGraph {
        let (g, _) = cfg_of(&parse(src).unwrap());
        let info = compute_liveness(&g);
        let lts = lifetimes(&info);
        interference_graph(&info, &lts)
    }

    #[test]
    fn single_variable_has_no_edges() {
        assert_eq!(graph_of("x := 1; x := x + 1").edge_count(), 0);
    }

    #[test]
    fn disjoint_lifetimes_do_not_interfere() {
        let ig = graph_of("a := 1; b := a; c := b");
        let (a, c) = (ig.vars().id("a").unwrap(), ig.vars().id("c").unwrap());
        assert!(!ig.interferes(a, c));
    }

    #[test]
    fn overlapping_lifetimes_interfere() {
        let ig = graph_of("a := 1; b := 2; c := a + b");
        assert_eq!(ig.edge_names(), vec![["a", "b"]]);
        assert!(ig.to_dot().contains("\"a\" -- \"b\""));
    }
}
