use std::collections::BTreeSet;

use thiserror::Error;

use super::{
    calculating_set, is_calculating, masks_compatible, total_cost, CostK, InstanceError, LospreInstance, Mask,
    MaskRelation,
};
use crate::spl::{Children, DecompId, DecompKind, Decomposition, EdgeKey, SplGraph, VertexId};

/// Optimal partial costs of one decomposition node, indexed by the mask of
/// its distinguished vertices that lie in the life set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpRow {
    pub cost: [CostK; 16],
    /// Child masks chosen for each entry; unused for atomic nodes.
    pub back: [(Mask, Mask); 16],
}

impl DpRow {
    pub fn get(&self, mask: Mask) -> CostK {
        self.cost[mask.0 as usize]
    }

    /// Cheapest mask; ties go to the smallest.
    pub fn best(&self) -> (Mask, CostK) {
        let mut best = (Mask::EMPTY, self.cost[0]);
        for m in Mask::all().skip(1) {
            if self.get(m) < best.1 {
                best = (m, self.get(m));
            }
        }
        best
    }
}

#[derive(Debug, Error)]
pub enum LospreError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("decomposition does not match the graph: {0}")]
    Decomposition(String),
}

/// Optimal life set together with its cost and the edges computing the
/// expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LospreSolution {
    pub cost: CostK,
    pub life_set: BTreeSet<VertexId>,
    pub calculating_set: BTreeSet<EdgeKey>,
}

impl LospreSolution {
    /// `{"cost": [p, s], "life_set": [..], "calculating_set": [[x, y], ..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "cost": self.cost.to_json(),
            "life_set": self.life_set.iter().map(|v| v.0).collect::<Vec<_>>(),
            "calculating_set": self.calculating_set.iter().map(|(x, y)| [x.0, y.0]).collect::<Vec<_>>(),
        })
    }
}

/// Bottom-up table computation over a decomposition.
pub struct LospreDp<'a> {
    graph: &'a SplGraph,
    decomp: &'a Decomposition,
    inst: &'a LospreInstance,
    rows: Vec<DpRow>,
}

impl<'a> LospreDp<'a> {
    pub fn new(graph: &'a SplGraph, decomp: &'a Decomposition, inst: &'a LospreInstance) -> LospreDp<'a> {
        let mut dp = LospreDp { graph, decomp, inst, rows: Vec::with_capacity(decomp.len()) };
        for id in decomp.ids() {
            let row = match decomp.node(id).kind {
                k if k.is_atomic() => dp.atomic(id),
                DecompKind::Series => dp.series(id),
                DecompKind::Parallel => dp.parallel(id),
                _ => dp.loop_node(id),
            };
            dp.rows.push(row);
        }
        dp
    }

    pub fn row(&self, id: DecompId) -> &DpRow {
        &self.rows[id.index()]
    }

    fn life_cost(&self, mask: Mask, id: DecompId) -> CostK {
        mask.vertices(self.decomp.node(id).boundary).map(|v| self.inst.vertex_cost(v)).sum()
    }

    fn edge_term(&self, (x, y): EdgeKey, in_life: impl Fn(VertexId) -> bool) -> CostK {
        if is_calculating(x, y, in_life, &self.inst.uses, &self.inst.invalidating) {
            self.inst.edge_cost((x, y))
        } else {
            CostK::ZERO
        }
    }

    fn in_mask(&self, id: DecompId, mask: Mask) -> impl Fn(VertexId) -> bool {
        let boundary = self.decomp.node(id).boundary;
        move |v| mask.vertices(boundary).any(|u| u == v)
    }

    pub fn atomic(&self, id: DecompId) -> DpRow {
        let node = self.decomp.node(id);
        let edge = node.local_edges[0];
        let mut row = DpRow { cost: [CostK::ZERO; 16], back: [(Mask::EMPTY, Mask::EMPTY); 16] };
        for m in Mask::all() {
            row.cost[m.0 as usize] = self.edge_term(edge, self.in_mask(id, m)) + self.life_cost(m, id);
        }
        row
    }

    fn operands(&self, id: DecompId) -> (DecompId, DecompId) {
        match self.decomp.node(id).children {
            Children::Two(v, w) => (v, w),
            ref other => panic!("binary node with children {other:?}"),
        }
    }

    pub fn series(&self, id: DecompId) -> DpRow {
        let (v, w) = self.operands(id);
        let (rv, rw) = (self.row(v), self.row(w));
        let shared = |xv: Mask| self.life_cost(Mask(xv.0 & (Mask::T | Mask::B | Mask::C)), v);
        let mut row = DpRow { cost: [CostK::ZERO; 16], back: [(Mask::EMPTY, Mask::EMPTY); 16] };
        for x in Mask::all() {
            // Only the merged vertex T_v = S_w is free; try it out, then in.
            let mut best: Option<(CostK, Mask, Mask)> = None;
            for middle in [false, true] {
                let xv = Mask(x.0 & (Mask::S | Mask::B | Mask::C) | if middle { Mask::T } else { 0 });
                let xw = Mask(x.0 & (Mask::T | Mask::B | Mask::C) | if middle { Mask::S } else { 0 });
                debug_assert!(
                    masks_compatible(MaskRelation::SeriesLeft, x, xv)
                        && masks_compatible(MaskRelation::SeriesRight, x, xw)
                        && masks_compatible(MaskRelation::SeriesCross, xv, xw)
                );
                let c = rv.get(xv) + rw.get(xw) - shared(xv);
                if best.is_none_or(|(b, _, _)| c < b) {
                    best = Some((c, xv, xw));
                }
            }
            let (c, xv, xw) = best.expect("every series mask has a completion");
            row.cost[x.0 as usize] = c;
            row.back[x.0 as usize] = (xv, xw);
        }
        row
    }

    pub fn parallel(&self, id: DecompId) -> DpRow {
        let (v, w) = self.operands(id);
        let (rv, rw) = (self.row(v), self.row(w));
        let left = &self.decomp.node(v).boundary_edges;
        let shared: Vec<EdgeKey> =
            self.decomp.node(w).boundary_edges.iter().filter(|e| left.contains(e)).copied().collect();
        let mut row = DpRow { cost: [CostK::ZERO; 16], back: [(Mask::EMPTY, Mask::EMPTY); 16] };
        for x in Mask::all() {
            let in_life = self.in_mask(id, x);
            let counted_twice: CostK = shared.iter().map(|e| self.edge_term(*e, &in_life)).sum();
            row.cost[x.0 as usize] = rv.get(x) + rw.get(x) - self.life_cost(x, id) - counted_twice;
            row.back[x.0 as usize] = (x, x);
        }
        row
    }

    pub fn loop_node(&self, id: DecompId) -> DpRow {
        let body = match self.decomp.node(id).children {
            Children::One(b) => b,
            ref other => panic!("loop node with children {other:?}"),
        };
        let frame = &self.decomp.node(id).local_edges;
        let (outer, inner) = (self.decomp.node(id).boundary, self.decomp.node(body).boundary);
        let rb = self.row(body);
        // Frame edges only touch the loop's S and T, so the best body mask
        // depends on those two bits alone.
        let mut by_ends: [Option<(CostK, Mask)>; 4] = [None; 4];
        let mut row = DpRow { cost: [CostK::ZERO; 16], back: [(Mask::EMPTY, Mask::EMPTY); 16] };
        for x in Mask::all() {
            let ends = x.0 & (Mask::S | Mask::T);
            let (c, xv) = *by_ends[ends as usize].get_or_insert_with(|| {
                let mut best: Option<(CostK, Mask)> = None;
                for xv in Mask::all() {
                    let in_life =
                        |v: VertexId| Mask(ends).vertices(outer).any(|u| u == v) || xv.vertices(inner).any(|u| u == v);
                    let frame_cost: CostK = frame.iter().map(|e| self.edge_term(*e, in_life)).sum();
                    let c = rb.get(xv) + frame_cost;
                    if best.is_none_or(|(b, _)| c < b) {
                        best = Some((c, xv));
                    }
                }
                best.expect("sixteen body masks")
            });
            row.cost[x.0 as usize] = c + self.life_cost(x, id);
            row.back[x.0 as usize] = (xv, Mask::EMPTY);
        }
        row
    }

    /// Life set chosen by the tables when the root takes `mask`.
    pub fn reconstruct(&self, mask: Mask) -> BTreeSet<VertexId> {
        let mut life = BTreeSet::new();
        let mut stack = vec![(self.decomp.root(), mask)];
        while let Some((id, m)) = stack.pop() {
            let node = self.decomp.node(id);
            life.extend(m.vertices(node.boundary));
            let (a, b) = self.row(id).back[m.0 as usize];
            match node.children {
                Children::None => {}
                Children::One(body) => stack.push((body, a)),
                Children::Two(v, w) => {
                    stack.push((v, a));
                    stack.push((w, b));
                }
            }
        }
        life
    }

    pub fn solve(&self) -> LospreSolution {
        let (mask, cost) = self.row(self.decomp.root()).best();
        let life_set = self.reconstruct(mask);
        debug_assert_eq!(total_cost(self.graph, self.inst, &life_set), cost);
        let calculating_set = calculating_set(self.graph, &self.inst.uses, &life_set, &self.inst.invalidating);
        LospreSolution { cost, life_set, calculating_set }
    }
}

/// Validates the instance and returns an optimal life set.
pub fn solve(graph: &SplGraph, decomp: &Decomposition, inst: &LospreInstance) -> Result<LospreSolution, LospreError> {
    inst.validate(graph)?;
    if decomp.node(decomp.root()).boundary != graph.boundary() {
        return Err(LospreError::Decomposition("root boundary differs from the graph".into()));
    }
    Ok(LospreDp::new(graph, decomp, inst).solve())
}
