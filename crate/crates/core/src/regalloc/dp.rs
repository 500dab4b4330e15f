use std::collections::{BTreeSet, HashMap};

use super::{CostModel, PartialAssignment, Slot, SlotEnumerator, SpillFree};
use crate::cost::{cost_to_json, Cost, Rational};
use crate::liveness::{InterferenceGraph, LiveInfo, VarId};
use crate::spl::{Children, DecompId, DecompKind, Decomposition, EdgeKey, SplGraph};

/// Everything the allocator reads about one program.
#[derive(Clone, Copy)]
pub struct RaProblem<'a> {
    pub graph: &'a SplGraph,
    pub decomp: &'a Decomposition,
    pub live: &'a LiveInfo,
    pub interference: &'a InterferenceGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RaOptions {
    /// Key tables by register-renaming class. Only honoured for cost
    /// models that are renaming invariant.
    pub canonical: bool,
    /// Answer "infeasible" up front when some vertex has more than `r`
    /// live variables. Only meaningful when spills are forbidden.
    pub early_exit: bool,
}

impl Default for RaOptions {
    fn default() -> RaOptions {
        RaOptions { canonical: false, early_exit: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RaStats {
    pub stored_entries: usize,
    pub largest_table: usize,
    pub exited_early: bool,
}

#[derive(Clone, Debug)]
enum Back {
    Leaf,
    Join { first: usize, second: Option<usize>, joint: Vec<Slot> },
}

/// One finite table entry: `opt(H, key) = cost`.
#[derive(Clone, Debug)]
pub struct OptEntry {
    pub key: Vec<Slot>,
    pub cost: Rational,
    back: Back,
}

/// `opt(H, f')` for every boundary assignment `f'` of one node. Entries
/// with cost `+inf` are not stored.
#[derive(Clone, Debug)]
pub struct OptTable {
    domain: Vec<VarId>,
    joint: Vec<VarId>,
    canonical: bool,
    entries: Vec<OptEntry>,
    index: HashMap<Vec<Slot>, usize>,
}

impl OptTable {
    fn new(domain: Vec<VarId>, joint: Vec<VarId>, canonical: bool) -> OptTable {
        OptTable { domain, joint, canonical, entries: Vec::new(), index: HashMap::new() }
    }

    fn offer(&mut self, key: Vec<Slot>, cost: Rational, back: Back) {
        match self.index.get(&key) {
            Some(&i) => {
                if cost < self.entries[i].cost {
                    self.entries[i].cost = cost;
                    self.entries[i].back = back;
                }
            }
            None => {
                self.index.insert(key.clone(), self.entries.len());
                self.entries.push(OptEntry { key, cost, back });
            }
        }
    }

    fn lookup(&self, key: &[Slot]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn domain(&self) -> &[VarId] {
        &self.domain
    }

    pub fn entries(&self) -> &[OptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `opt(H, f')` for an assignment whose domain covers this table's.
    pub fn get(&self, f: &PartialAssignment) -> Cost {
        let mut key: Vec<Slot> = match self.domain.iter().map(|v| f.get(*v)).collect::<Option<Vec<_>>>() {
            Some(key) => key,
            None => return Cost::Infinite,
        };
        if self.canonical {
            canonical_slots(&mut key);
        }
        self.lookup(&key).map_or(Cost::Infinite, |i| Cost::Finite(self.entries[i].cost))
    }

    pub fn min(&self) -> Cost {
        self.entries.iter().map(|e| Cost::Finite(e.cost)).min().unwrap_or(Cost::Infinite)
    }

    fn best(&self) -> Option<usize> {
        (0..self.entries.len()).min_by(|&a, &b| {
            let (x, y) = (&self.entries[a], &self.entries[b]);
            x.cost.cmp(&y.cost).then_with(|| x.key.cmp(&y.key))
        })
    }
}

/// Relabels registers by first appearance, in place.
fn canonical_slots(slots: &mut [Slot]) {
    let mut renaming: Vec<(u32, u32)> = Vec::new();
    for slot in slots.iter_mut() {
        if let Slot::Reg(r) = *slot {
            let mapped = match renaming.iter().find(|(from, _)| *from == r) {
                Some((_, to)) => *to,
                None => {
                    let to = renaming.len() as u32;
                    renaming.push((r, to));
                    to
                }
            };
            *slot = Slot::Reg(mapped);
        }
    }
}

fn sorted_union(parts: &[&[VarId]]) -> Vec<VarId> {
    let set: BTreeSet<VarId> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    set.into_iter().collect()
}

/// Positions of `sub` inside the sorted superset `joint`.
fn positions(joint: &[VarId], sub: &[VarId]) -> Vec<usize> {
    sub.iter().map(|v| joint.binary_search(v).expect("domain inside joint domain")).collect()
}

fn project(slots: &[Slot], pos: &[usize]) -> Vec<Slot> {
    pos.iter().map(|&p| slots[p]).collect()
}

/// The dynamic program of one allocation query.
pub struct RaDp<'a> {
    problem: RaProblem<'a>,
    model: &'a dyn CostModel,
    registers: u32,
    canonical: bool,
    allow_spill: bool,
    domains: Vec<Vec<VarId>>,
}

impl<'a> RaDp<'a> {
    pub fn new(problem: RaProblem<'a>, model: &'a dyn CostModel, registers: u32, options: RaOptions) -> RaDp<'a> {
        let domains = node_domains(&problem);
        RaDp {
            problem,
            model,
            registers,
            canonical: options.canonical && model.renaming_invariant(),
            allow_spill: !model.forbids_spill(),
            domains,
        }
    }

    /// Variables a node's table is keyed on: those live at one of its four
    /// distinguished vertices, plus any variable live both strictly inside
    /// the node's subgraph and outside it. The second part is empty when
    /// lifetimes are connected.
    pub fn domain(&self, node: DecompId) -> &[VarId] {
        &self.domains[node.index()]
    }

    fn edge_cost(&self, edge: EdgeKey, joint: &[VarId], slots: &[Slot]) -> Cost {
        let live: Vec<(VarId, Slot)> = self
            .problem
            .live
            .at_edge(edge)
            .iter()
            .map(|v| (*v, slots[joint.binary_search(v).expect("edge live set inside joint domain")]))
            .collect();
        self.model.edge_cost(edge, &live)
    }

    fn enumerator<'s>(&'s self, vars: &'s [VarId], fixed: &'s [(VarId, Slot)], fresh: u32) -> SlotEnumerator<'s> {
        SlotEnumerator {
            vars,
            fixed,
            registers: self.registers,
            allow_spill: self.allow_spill,
            fresh: self.canonical.then_some(fresh),
            ig: self.problem.interference,
        }
    }

    /// Leaf: `opt(H, f') = c(e, f')` for the node's single edge.
    pub fn atomic(&self, node: DecompId) -> OptTable {
        let n = self.problem.decomp.node(node);
        assert!(n.kind.is_atomic(), "atomic table requested for {:?}", n.kind);
        let edge = n.local_edges[0];
        let domain = self.domains[node.index()].clone();
        let mut table = OptTable::new(domain.clone(), domain.clone(), self.canonical);
        self.enumerator(&domain, &[], 0).for_each(|slots| {
            if let Cost::Finite(c) = self.edge_cost(edge, &domain, slots) {
                table.offer(slots.to_vec(), c, Back::Leaf);
            }
        });
        table
    }

    pub fn series(&self, node: DecompId, left: &OptTable, right: &OptTable) -> OptTable {
        assert_eq!(self.problem.decomp.node(node).kind, DecompKind::Series);
        self.binary(node, left, right)
    }

    pub fn parallel(&self, node: DecompId, left: &OptTable, right: &OptTable) -> OptTable {
        assert_eq!(self.problem.decomp.node(node).kind, DecompKind::Parallel);
        self.binary(node, left, right)
    }

    /// Loop: the child's optimum plus the five frame edges, evaluated on the
    /// joint assignment over both boundaries.
    pub fn loop_node(&self, node: DecompId, child: &OptTable) -> OptTable {
        let n = self.problem.decomp.node(node);
        assert_eq!(n.kind, DecompKind::Loop);
        self.combine(node, child, None, &n.local_edges, &[])
    }

    fn binary(&self, node: DecompId, left: &OptTable, right: &OptTable) -> OptTable {
        let decomp = self.problem.decomp;
        let Children::Two(a, b) = decomp.node(node).children else {
            panic!("binary node without two children");
        };
        // Edges owned by both operands end at shared distinguished vertices,
        // so they show up in both children's boundary edge lists.
        let shared: Vec<EdgeKey> = decomp
            .node(a)
            .boundary_edges
            .iter()
            .filter(|e| decomp.node(b).boundary_edges.contains(e))
            .copied()
            .collect();
        self.combine(node, left, Some(right), &[], &shared)
    }

    fn combine(
        &self,
        node: DecompId,
        base: &OptTable,
        other: Option<&OptTable>,
        added: &[EdgeKey],
        shared: &[EdgeKey],
    ) -> OptTable {
        let domain = self.domains[node.index()].clone();
        let other_domain: &[VarId] = other.map_or(&[], |t| &t.domain);
        let joint = sorted_union(&[&domain, &base.domain, other_domain]);
        let extension: Vec<VarId> = joint.iter().copied().filter(|v| base.domain.binary_search(v).is_err()).collect();
        let (pos_base, pos_ext) = (positions(&joint, &base.domain), positions(&joint, &extension));
        let (pos_other, pos_node) = (positions(&joint, other_domain), positions(&joint, &domain));
        let mut table = OptTable::new(domain, joint.clone(), self.canonical);
        let mut slots = vec![Slot::Spill; joint.len()];

        for (i, entry) in base.entries.iter().enumerate() {
            let fixed: Vec<(VarId, Slot)> = base.domain.iter().copied().zip(entry.key.iter().copied()).collect();
            let fresh = entry.key.iter().filter_map(|s| s.register()).max().map_or(0, |r| r + 1);
            for (p, s) in pos_base.iter().zip(&entry.key) {
                slots[*p] = *s;
            }
            self.enumerator(&extension, &fixed, fresh).for_each(|ext| {
                for (p, s) in pos_ext.iter().zip(ext) {
                    slots[*p] = *s;
                }
                let mut cost = entry.cost;
                let mut second = None;
                if let Some(other) = other {
                    let mut key = project(&slots, &pos_other);
                    if self.canonical {
                        canonical_slots(&mut key);
                    }
                    let Some(j) = other.lookup(&key) else { return };
                    cost += other.entries[j].cost;
                    second = Some(j);
                }
                for &e in added {
                    match self.edge_cost(e, &joint, &slots) {
                        Cost::Finite(c) => cost += c,
                        Cost::Infinite => return,
                    }
                }
                for &e in shared {
                    match self.edge_cost(e, &joint, &slots) {
                        Cost::Finite(c) => cost -= c,
                        Cost::Infinite => return,
                    }
                }
                let mut key = project(&slots, &pos_node);
                if self.canonical {
                    canonical_slots(&mut key);
                }
                table.offer(key, cost, Back::Join { first: i, second, joint: slots.clone() });
            });
        }
        table
    }

    /// Tables of every node, bottom-up (indexed like the decomposition).
    pub fn tables(&self) -> Vec<OptTable> {
        let decomp = self.problem.decomp;
        let mut tables: Vec<OptTable> = Vec::with_capacity(decomp.len());
        for id in decomp.ids() {
            let node = decomp.node(id);
            let table = match node.children {
                Children::None => self.atomic(id),
                Children::One(c) => self.loop_node(id, &tables[c.index()]),
                Children::Two(a, b) => self.binary(id, &tables[a.index()], &tables[b.index()]),
            };
            tables.push(table);
        }
        tables
    }

    /// Runs the DP and retraces an optimal assignment.
    pub fn solve(&self) -> RaResult {
        let tables = self.tables();
        let stats = RaStats {
            stored_entries: tables.iter().map(OptTable::len).sum(),
            largest_table: tables.iter().map(OptTable::len).max().unwrap_or(0),
            exited_early: false,
        };
        let root = self.problem.decomp.root();
        let Some(best) = tables[root.index()].best() else {
            return RaResult::infeasible(self.registers, stats);
        };
        let cost = Cost::Finite(tables[root.index()].entries[best].cost);
        let assignment = self.reconstruct(&tables, best);
        let breakdown = self.breakdown(&assignment);
        RaResult { cost, assignment: Some(assignment), registers: self.registers, breakdown, stats }
    }

    fn reconstruct(&self, tables: &[OptTable], best: usize) -> PartialAssignment {
        let decomp = self.problem.decomp;
        let root = decomp.root();
        let mut chosen: HashMap<VarId, Slot> = HashMap::new();
        let mut stack = vec![(root, best, tables[root.index()].entries[best].key.clone())];
        while let Some((node, idx, actual)) = stack.pop() {
            let table = &tables[node.index()];
            for (v, s) in table.domain.iter().zip(&actual) {
                let previous = chosen.insert(*v, *s);
                debug_assert!(previous.is_none_or(|p| p == *s), "inconsistent slot for {v:?}");
            }
            let Back::Join { first, second, joint } = &table.entries[idx].back else {
                continue;
            };
            let joint = self.rename_joint(&table.joint, joint, &table.domain, &actual);
            let children: Vec<DecompId> = decomp.node(node).children.iter().collect();
            for (child, entry) in children.into_iter().zip(std::iter::once(*first).chain(*second)) {
                let child_table = &tables[child.index()];
                let child_actual = project(&joint, &positions(&table.joint, &child_table.domain));
                stack.push((child, entry, child_actual));
            }
        }
        let fallback = if self.registers > 0 { Slot::Reg(0) } else { Slot::Spill };
        PartialAssignment::from_pairs(
            self.problem.live.vars().ids().map(|v| (v, chosen.get(&v).copied().unwrap_or(fallback))),
        )
    }

    /// Maps the stored joint assignment onto the actual registers chosen for
    /// this node. Identity unless tables are canonical.
    fn rename_joint(&self, joint_domain: &[VarId], joint: &[Slot], domain: &[VarId], actual: &[Slot]) -> Vec<Slot> {
        if !self.canonical {
            return joint.to_vec();
        }
        let mut renaming: HashMap<u32, u32> = HashMap::new();
        for (p, target) in positions(joint_domain, domain).into_iter().zip(actual) {
            if let (Slot::Reg(from), Slot::Reg(to)) = (joint[p], *target) {
                renaming.insert(from, to);
            }
        }
        let mut spare =
            (0..self.registers).filter(|r| !renaming.values().any(|t| t == r)).collect::<Vec<_>>().into_iter();
        joint
            .iter()
            .map(|s| match *s {
                Slot::Spill => Slot::Spill,
                Slot::Reg(r) => {
                    Slot::Reg(*renaming.entry(r).or_insert_with(|| spare.next().expect("enough registers")))
                }
            })
            .collect()
    }

    fn breakdown(&self, f: &PartialAssignment) -> Vec<(EdgeKey, Cost)> {
        self.problem
            .graph
            .edges()
            .iter()
            .map(|e| {
                let live = f.restrict(self.problem.live.at_edge(e.key()));
                (e.key(), self.model.edge_cost(e.key(), live.pairs()))
            })
            .collect()
    }
}

fn node_domains(problem: &RaProblem<'_>) -> Vec<Vec<VarId>> {
    let (decomp, live) = (problem.decomp, problem.live);
    let mut total = vec![0u32; live.vars().len()];
    for (_, set) in live.vertices() {
        for v in set {
            total[v.index()] += 1;
        }
    }
    let bump = |map: &mut HashMap<VarId, u32>, v: crate::spl::VertexId| {
        for var in live.at_vertex(v) {
            *map.entry(*var).or_insert(0) += 1;
        }
    };
    let mut interior: Vec<Option<HashMap<VarId, u32>>> = Vec::with_capacity(decomp.len());
    let mut domains = Vec::with_capacity(decomp.len());
    for node in decomp.nodes() {
        let mut inside: HashMap<VarId, u32> = match node.children {
            Children::None => HashMap::new(),
            Children::One(c) => {
                let mut map = interior[c.index()].take().expect("child visited once");
                for v in decomp.node(c).boundary.as_array() {
                    bump(&mut map, v);
                }
                map
            }
            Children::Two(a, b) => {
                let (mut big, mut small) =
                    (interior[a.index()].take().expect("child"), interior[b.index()].take().expect("child"));
                if big.len() < small.len() {
                    std::mem::swap(&mut big, &mut small);
                }
                for (var, n) in small {
                    *big.entry(var).or_insert(0) += n;
                }
                if node.kind == DecompKind::Series {
                    bump(&mut big, decomp.node(a).boundary.t);
                }
                big
            }
        };
        let mut domain: BTreeSet<VarId> = BTreeSet::new();
        let mut on_boundary: HashMap<VarId, u32> = HashMap::new();
        for v in node.boundary.as_array() {
            domain.extend(live.at_vertex(v));
            bump(&mut on_boundary, v);
        }
        for (var, n) in &inside {
            let within = n + on_boundary.get(var).copied().unwrap_or(0);
            if *n > 0 && total[var.index()] > within {
                domain.insert(*var);
            }
        }
        inside.retain(|_, n| *n > 0);
        interior.push(Some(inside));
        domains.push(domain.into_iter().collect());
    }
    domains
}

/// Optimum of one allocation query, with a witness when finite.
#[derive(Clone, Debug)]
pub struct RaResult {
    pub cost: Cost,
    pub assignment: Option<PartialAssignment>,
    pub registers: u32,
    /// `c(e, f)` for every edge, recomputed from the witness.
    pub breakdown: Vec<(EdgeKey, Cost)>,
    pub stats: RaStats,
}

impl RaResult {
    fn infeasible(registers: u32, stats: RaStats) -> RaResult {
        RaResult { cost: Cost::Infinite, assignment: None, registers, breakdown: Vec::new(), stats }
    }

    /// `Σ_e c(e, f)` of the witness, independent of the DP tables.
    pub fn recomputed_cost(&self) -> Cost {
        match self.assignment {
            Some(_) => self.breakdown.iter().map(|(_, c)| *c).sum(),
            None => Cost::Infinite,
        }
    }

    pub fn to_json(&self, vars: &crate::liveness::VarTable) -> serde_json::Value {
        serde_json::json!({
            "cost": cost_to_json(&self.cost),
            "assignment": self.assignment.as_ref().map(|a| a.to_json(vars)),
            "registers": self.registers,
        })
    }
}

/// Minimum of `Σ_e c(e, f)` over valid `f` with `r` registers.
pub fn min_cost_allocation(problem: RaProblem<'_>, model: &dyn CostModel, r: u32) -> RaResult {
    min_cost_allocation_with(problem, model, r, RaOptions::default())
}

pub fn min_cost_allocation_with(problem: RaProblem<'_>, model: &dyn CostModel, r: u32, options: RaOptions) -> RaResult {
    if options.early_exit && model.forbids_spill() && problem.live.max_pressure() > r as usize {
        let stats = RaStats { exited_early: true, ..RaStats::default() };
        return RaResult::infeasible(r, stats);
    }
    RaDp::new(problem, model, r, options).solve()
}

/// Outcome of a spill-free query.
#[derive(Clone, Debug)]
pub struct Feasibility {
    pub feasible: bool,
    pub assignment: Option<PartialAssignment>,
    pub stats: RaStats,
}

/// Can every variable stay in one of `r` registers?
pub fn spill_free(problem: RaProblem<'_>, r: u32) -> Feasibility {
    spill_free_with(problem, r, RaOptions::default())
}

pub fn spill_free_with(problem: RaProblem<'_>, r: u32, options: RaOptions) -> Feasibility {
    let result = min_cost_allocation_with(problem, &SpillFree, r, options);
    Feasibility { feasible: result.cost == Cost::ZERO, assignment: result.assignment, stats: result.stats }
}

/// Smallest spill-free register count, scanning up from the maximum
/// number of simultaneously live variables. `None` if above `r_max`.
pub fn min_registers(problem: RaProblem<'_>, r_max: u32) -> Option<u32> {
    let lower = problem.live.max_pressure() as u32;
    (lower..=r_max).find(|&r| spill_free(problem, r).feasible)
}
