//! Backward liveness over an SPL graph, lifetimes and the interference graph.

mod interference;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::spl::{EdgeKey, EdgeLabel, LabelKind, SplGraph, StmtLabel, VertexId};

pub use interference::{interference_graph, InterferenceGraph};

/// Dense variable index; ids follow the lexicographic order of names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type VarSet = BTreeSet<VarId>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, VarId>,
}

impl VarTable {
    pub fn from_names<I: IntoIterator<Item = String>>(names: I) -> VarTable {
        let sorted: BTreeSet<String> = names.into_iter().collect();
        let names: Vec<String> = sorted.into_iter().collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), VarId(i as u32))).collect();
        VarTable { names, index }
    }

    /// Every identifier mentioned on some edge of `graph`.
    pub fn of_graph(graph: &SplGraph) -> VarTable {
        let mut names = BTreeSet::new();
        for edge in graph.edges() {
            for label in &edge.labels {
                match &label.kind {
                    LabelKind::Stmt(StmtLabel::Assign { target, expr }) => {
                        names.insert(target.clone());
                        names.extend(expr.vars());
                    }
                    LabelKind::Cond { expr, .. } => names.extend(expr.vars()),
                    _ => {}
                }
            }
        }
        VarTable::from_names(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.names[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Variables defined and used by one edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefUse {
    pub def: BTreeSet<String>,
    pub uses: BTreeSet<String>,
}

/// Def/use of an edge from its label set. Uses are the union over
/// right-hand sides and conditions. Defs are the intersection of the
/// assignment targets over statement labels, so an edge carrying several
/// different statements (or any non-assignment) kills nothing.
pub fn def_use(labels: &[EdgeLabel]) -> DefUse {
    let mut uses = BTreeSet::new();
    let mut def: Option<BTreeSet<String>> = None;
    let mut non_assign = false;
    for label in labels {
        match &label.kind {
            LabelKind::Stmt(StmtLabel::Assign { target, expr }) => {
                uses.extend(expr.vars());
                let own = BTreeSet::from([target.clone()]);
                def = Some(match def {
                    None => own,
                    Some(prev) => prev.intersection(&own).cloned().collect(),
                });
            }
            LabelKind::Stmt(_) => non_assign = true,
            LabelKind::Cond { expr, .. } => uses.extend(expr.vars()),
            LabelKind::LoopBack | LabelKind::LoopExitStub => {}
        }
    }
    let def = if non_assign { BTreeSet::new() } else { def.unwrap_or_default() };
    DefUse { def, uses }
}

/// Live sets at every vertex and edge.
#[derive(Clone, Debug)]
pub struct LiveInfo {
    vars: VarTable,
    vertex: BTreeMap<VertexId, VarSet>,
    edge: BTreeMap<EdgeKey, VarSet>,
}

struct EdgeFlow {
    src: usize,
    dst: usize,
    def: VarSet,
    uses: VarSet,
}

/// Least fixed point of `L(e) = use(e) ∪ (L(y) ∖ def(e))`,
/// `L(x) = ⋃ L(e)` over out-edges, by worklist iteration.
pub fn compute_liveness(graph: &SplGraph) -> LiveInfo {
    let vars = VarTable::of_graph(graph);
    let ids = |names: BTreeSet<String>| -> VarSet { names.iter().filter_map(|n| vars.id(n)).collect() };
    let flows: Vec<EdgeFlow> = graph
        .edges()
        .iter()
        .map(|e| {
            let du = def_use(&e.labels);
            EdgeFlow {
                src: graph.position(e.src).expect("edge source in graph"),
                dst: graph.position(e.dst).expect("edge target in graph"),
                def: ids(du.def),
                uses: ids(du.uses),
            }
        })
        .collect();
    let n = graph.vertex_count();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, f) in flows.iter().enumerate() {
        succ[f.src].push(i);
        pred[f.dst].push(i);
    }
    let edge_live = |f: &EdgeFlow, live: &[VarSet]| -> VarSet {
        let mut out = f.uses.clone();
        out.extend(live[f.dst].iter().filter(|v| !f.def.contains(v)));
        out
    };

    let mut live: Vec<VarSet> = vec![VarSet::new(); n];
    let mut queued = vec![true; n];
    let mut worklist: Vec<usize> = (0..n).collect();
    while let Some(x) = worklist.pop() {
        queued[x] = false;
        let mut next = VarSet::new();
        for &e in &succ[x] {
            next.extend(edge_live(&flows[e], &live));
        }
        if next != live[x] {
            live[x] = next;
            for &e in &pred[x] {
                let p = flows[e].src;
                if !queued[p] {
                    queued[p] = true;
                    worklist.push(p);
                }
            }
        }
    }

    let edge = graph.edges().iter().zip(&flows).map(|(e, f)| (e.key(), edge_live(f, &live))).collect();
    let vertex = graph.vertices().iter().copied().zip(live).collect();
    LiveInfo { vars, vertex, edge }
}

impl LiveInfo {
    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn at_vertex(&self, v: VertexId) -> &VarSet {
        static EMPTY: VarSet = VarSet::new();
        self.vertex.get(&v).unwrap_or(&EMPTY)
    }

    pub fn at_edge(&self, key: EdgeKey) -> &VarSet {
        static EMPTY: VarSet = VarSet::new();
        self.edge.get(&key).unwrap_or(&EMPTY)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &VarSet)> {
        self.vertex.iter().map(|(v, s)| (*v, s))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, &VarSet)> {
        self.edge.iter().map(|(k, s)| (*k, s))
    }

    /// Live set rendered as sorted names.
    pub fn names_at_vertex(&self, v: VertexId) -> Vec<&str> {
        self.at_vertex(v).iter().map(|id| self.vars.name(*id)).collect()
    }

    /// `max_a |L(a)|`, a lower bound on the registers needed without spills.
    pub fn max_pressure(&self) -> usize {
        self.vertex.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn to_json(&self, interference: &InterferenceGraph) -> serde_json::Value {
        let mut at_vertex = serde_json::Map::new();
        for (v, set) in &self.vertex {
            let names: Vec<&str> = set.iter().map(|id| self.vars.name(*id)).collect();
            at_vertex.insert(v.0.to_string(), serde_json::json!(names));
        }
        serde_json::json!({
            "liveAtVertex": at_vertex,
            "interference": interference.edge_names(),
        })
    }
}

/// Where one variable is live.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lifetime {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<EdgeKey>,
}

impl Lifetime {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }

    /// Connectivity of the induced subgraph, ignoring edge direction.
    /// An empty lifetime counts as connected.
    pub fn is_connected(&self) -> bool {
        let Some(&first) = self.vertices.iter().next() else {
            return self.edges.is_empty();
        };
        let mut adjacent: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for &(x, y) in &self.edges {
            for (a, b) in [(x, y), (y, x)] {
                if self.vertices.contains(&a) {
                    adjacent.entry(a).or_default().push(b);
                }
            }
        }
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(v) = stack.pop() {
            for &w in adjacent.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if self.vertices.contains(&w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.vertices.len() && self.edges.iter().all(|(x, y)| seen.contains(x) || seen.contains(y))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Lifetimes {
    pub by_var: BTreeMap<VarId, Lifetime>,
    /// Variables whose lifetime is not a connected subgraph.
    pub disconnected: Vec<VarId>,
}

impl Lifetimes {
    pub fn get(&self, var: VarId) -> Option<&Lifetime> {
        self.by_var.get(&var)
    }
}

/// Lifetime of every program variable; dead variables get an empty one.
pub fn lifetimes(info: &LiveInfo) -> Lifetimes {
    let mut by_var: BTreeMap<VarId, Lifetime> = info.vars.ids().map(|v| (v, Lifetime::default())).collect();
    for (v, set) in info.vertices() {
        for var in set {
            by_var.get_mut(var).expect("known variable").vertices.insert(v);
        }
    }
    for (key, set) in info.edges() {
        for var in set {
            by_var.get_mut(var).expect("known variable").edges.insert(key);
        }
    }
    let disconnected = by_var.iter().filter(|(_, lt)| !lt.is_connected()).map(|(v, _)| *v).collect();
    Lifetimes { by_var, disconnected }
}
