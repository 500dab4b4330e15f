//! Exhaustive reference solvers for small instances.
//!
//! Nothing here calls into the dynamic programs: costs are evaluated
//! straight from their definitions so that agreement between the two is
//! evidence rather than an echo.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cost::{cost_to_json, Cost};
use crate::liveness::{InterferenceGraph, LiveInfo, VarId};
use crate::lospre::{CostK, LospreInstance, LospreSolution};
use crate::regalloc::{CostModel, PartialAssignment, Slot};
use crate::spl::{EdgeKey, SplGraph, VertexId};

/// Hard caps on exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_vars: usize,
    pub max_vertices: usize,
    pub max_registers: u32,
    /// Upper bound on enumerated candidates (or search nodes).
    pub max_enumeration: u64,
}

impl Default for OracleBudget {
    fn default() -> OracleBudget {
        OracleBudget { max_vars: 10, max_vertices: 24, max_registers: 16, max_enumeration: 1 << 24 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("budget exceeded: {what} is {size}, limit {limit}")]
    BudgetExceeded { what: &'static str, size: u128, limit: u128 },
}

impl OracleBudget {
    fn check(&self, what: &'static str, size: u128, limit: u128) -> Result<(), OracleError> {
        if size > limit {
            return Err(OracleError::BudgetExceeded { what, size, limit });
        }
        Ok(())
    }

    /// `base^exp`, saturating.
    fn power(base: u128, exp: usize) -> u128 {
        (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
    }
}

/// Brute-force register allocation result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteRa {
    pub cost: Cost,
    /// First minimiser in enumeration order; `None` when every valid map
    /// costs `+inf`.
    pub assignment: Option<PartialAssignment>,
    pub registers: u32,
    pub enumerated: u64,
}

impl BruteRa {
    pub fn to_json(&self, vars: &crate::liveness::VarTable) -> serde_json::Value {
        serde_json::json!({
            "cost": cost_to_json(&self.cost),
            "assignment": self.assignment.as_ref().map(|a| a.to_json(vars)),
            "registers": self.registers,
        })
    }
}

/// Minimum of `Σ_e c(e, f)` over every total map from the variables to
/// `[r] ∪ {⊥}` that gives interfering variables distinct registers.
/// Enumeration runs first variable most significant, `⊥` before `0`.
pub fn brute_force_ra(
    graph: &SplGraph,
    live: &LiveInfo,
    ig: &InterferenceGraph,
    model: &dyn CostModel,
    r: u32,
    budget: &OracleBudget,
) -> Result<BruteRa, OracleError> {
    let vars: Vec<VarId> = live.vars().ids().collect();
    budget.check("variable count", vars.len() as u128, budget.max_vars as u128)?;
    budget.check("register count", r as u128, budget.max_registers as u128)?;
    let total = OracleBudget::power(r as u128 + 1, vars.len());
    budget.check("(r+1)^|vars|", total, budget.max_enumeration as u128)?;

    let edges: Vec<(EdgeKey, Vec<VarId>)> =
        graph.edges().iter().map(|e| (e.key(), live.at_edge(e.key()).iter().copied().collect())).collect();
    let slot_of = |digit: u32| if digit == 0 { Slot::Spill } else { Slot::Reg(digit - 1) };

    let mut digits = vec![0u32; vars.len()];
    let mut best: Option<(Cost, Vec<u32>)> = None;
    let mut enumerated = 0u64;
    loop {
        enumerated += 1;
        let valid = (0..vars.len()).all(|i| {
            digits[i] == 0 || (i + 1..vars.len()).all(|j| digits[i] != digits[j] || !ig.interferes(vars[i], vars[j]))
        });
        if valid {
            let cost: Cost = edges
                .iter()
                .map(|(key, live_vars)| {
                    let restricted: Vec<(VarId, Slot)> =
                        live_vars.iter().map(|v| (*v, slot_of(digits[v.index()]))).collect();
                    model.edge_cost(*key, &restricted)
                })
                .sum();
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, digits.clone()));
            }
        }
        // Odometer step: last variable varies fastest.
        let mut i = vars.len();
        loop {
            if i == 0 {
                let (cost, witness) = best.unwrap_or((Cost::Infinite, Vec::new()));
                let assignment = cost
                    .is_finite()
                    .then(|| PartialAssignment::from_pairs(vars.iter().zip(&witness).map(|(v, d)| (*v, slot_of(*d)))));
                return Ok(BruteRa { cost, assignment, registers: r, enumerated });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] <= r {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Minimum total cost over all `L ⊆ V`, enumerated as bit vectors over the
/// graph's vertex order (vertex `i` is bit `i`); the first minimiser wins.
pub fn brute_force_lospre(
    graph: &SplGraph,
    inst: &LospreInstance,
    budget: &OracleBudget,
) -> Result<LospreSolution, OracleError> {
    let n = graph.vertex_count();
    budget.check("vertex count", n as u128, budget.max_vertices as u128)?;
    budget.check("2^|V|", OracleBudget::power(2, n), budget.max_enumeration as u128)?;

    let vertices = graph.vertices();
    let members =
        |bits: u64| -> BTreeSet<VertexId> { (0..n).filter(|i| bits >> i & 1 == 1).map(|i| vertices[i]).collect() };
    let evaluate = |life: &BTreeSet<VertexId>| -> (CostK, BTreeSet<EdgeKey>) {
        let mut cost = CostK::ZERO;
        let mut calc = BTreeSet::new();
        for e in graph.edges() {
            let held = life.contains(&e.src) && !inst.invalidating.contains(&e.src);
            let needed = inst.uses.contains(&e.dst) || life.contains(&e.dst);
            if !held && needed {
                cost = cost + inst.edge_cost(e.key());
                calc.insert(e.key());
            }
        }
        for v in life {
            cost = cost + inst.vertex_cost(*v);
        }
        (cost, calc)
    };

    let mut best: Option<(CostK, u64)> = None;
    for bits in 0..(1u64 << n) {
        let (cost, _) = evaluate(&members(bits));
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, bits));
        }
    }
    let (cost, bits) = best.expect("at least the empty life set");
    let life_set = members(bits);
    let (_, calculating_set) = evaluate(&life_set);
    Ok(LospreSolution { cost, life_set, calculating_set })
}

/// Exact `r`-colourability by backtracking. The name is historical: the
/// search is complete, not a heuristic. Search nodes count against
/// `max_enumeration`.
pub fn greedy_coloring_check(ig: &InterferenceGraph, r: u32, budget: &OracleBudget) -> Result<bool, OracleError> {
    let mut order: Vec<VarId> = ig.vars().ids().collect();
    order.sort_by_key(|v| std::cmp::Reverse(ig.neighbours(*v).len()));
    let mut colour: Vec<Option<u32>> = vec![None; ig.var_count()];
    let mut nodes = 0u64;

    fn search(
        ig: &InterferenceGraph,
        order: &[VarId],
        colour: &mut [Option<u32>],
        r: u32,
        used: u32,
        nodes: &mut u64,
        budget: &OracleBudget,
    ) -> Result<bool, OracleError> {
        let Some((&v, rest)) = order.split_first() else { return Ok(true) };
        *nodes += 1;
        budget.check("colouring search nodes", *nodes as u128, budget.max_enumeration as u128)?;
        // Registers above `used` are interchangeable, so only one is tried.
        for c in 0..r.min(used + 1) {
            if ig.neighbours(v).iter().any(|u| colour[u.index()] == Some(c)) {
                continue;
            }
            colour[v.index()] = Some(c);
            if search(ig, rest, colour, r, used.max(c + 1), nodes, budget)? {
                return Ok(true);
            }
            colour[v.index()] = None;
        }
        Ok(false)
    }

    search(ig, &order, &mut colour, r, 0, &mut nodes, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Rational;
    use crate::frontend::{parse, parse_expr};
    use crate::liveness::{compute_liveness, interference_graph, lifetimes, VarTable};
    use crate::lospre::{derive_instance, solve};
    use crate::regalloc::{SpillFree, SpillWeights};
    use crate::spl::cfg_of;

    const REGALOC: &str = "while 1 do a := b + c; d := -a; e := d + f; \
        if 1 then f := 2 * e else b := d + e; e := e - 1 fi; b := f + c od";

    fn analyse(src: &str) -> (SplGraph, LiveInfo, InterferenceGraph) {
        let (g, _) = cfg_of(&parse(src).unwrap());
        let live = compute_liveness(&g);
        let ig = interference_graph(&live, &lifetimes(&live));
        (g, live, ig)
    }

    #[test]
    fn empty_program_costs_nothing() {
        let (g, live, ig) = analyse("skip");
        let res = brute_force_ra(&g, &live, &ig, &SpillWeights::unit(), 0, &OracleBudget::default()).unwrap();
        assert_eq!(res.cost, Cost::ZERO);
        assert_eq!(res.enumerated, 1);
    }

    #[test]
    fn figure_program_colours_with_four() {
        let (g, live, ig) = analyse(REGALOC);
        let budget = OracleBudget::default();
        assert_eq!(brute_force_ra(&g, &live, &ig, &SpillFree, 4, &budget).unwrap().cost, Cost::ZERO);
        assert_eq!(brute_force_ra(&g, &live, &ig, &SpillFree, 3, &budget).unwrap().cost, Cost::Infinite);
        assert!(greedy_coloring_check(&ig, 4, &budget).unwrap());
        assert!(!greedy_coloring_check(&ig, 3, &budget).unwrap());
    }

    #[test]
    fn two_interfering_variables_one_register() {
        let (g, live, ig) = analyse("a := 1; b := 2; c := a + b");
        let res = brute_force_ra(&g, &live, &ig, &SpillWeights::unit(), 1, &OracleBudget::default()).unwrap();
        // a is live on two edges, b on one: spilling b is cheaper.
        assert_eq!(res.cost, Cost::from_int(1));
        let b = live.vars().id("b").unwrap();
        assert_eq!(res.assignment.unwrap().get(b), Some(Slot::Spill));
    }

    #[test]
    fn edgeless_graph() {
        let ig = InterferenceGraph::from_edges(VarTable::from_names(["x".into(), "y".into()]), &[]);
        assert!(greedy_coloring_check(&ig, 1, &OracleBudget::default()).unwrap());
        assert!(!greedy_coloring_check(&ig, 0, &OracleBudget::default()).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let (g, live, ig) = analyse(REGALOC);
        let tight = OracleBudget { max_enumeration: 100, ..OracleBudget::default() };
        let err = brute_force_ra(&g, &live, &ig, &SpillFree, 3, &tight).unwrap_err();
        assert!(err.to_string().contains("budget exceeded"));
        let few = OracleBudget { max_vertices: 3, ..OracleBudget::default() };
        let inst = derive_instance(&g, &parse_expr("d + e").unwrap(), CostK::ints(1, 0), CostK::ints(0, 1));
        assert!(brute_force_lospre(&g, &inst, &few).is_err());
    }

    #[test]
    fn lospre_worked_example() {
        let src = "a := x + y; skip; if c then b := x + y; x := 0 else d := x + y; x := 1 fi; g := x + y; skip";
        let (g, d) = cfg_of(&parse(src).unwrap());
        let tenth = CostK::scalar(Rational::new(1, 10));
        let inst = derive_instance(&g, &parse_expr("x + y").unwrap(), CostK::ints(1, 0), tenth);
        let brute = brute_force_lospre(&g, &inst, &OracleBudget::default()).unwrap();
        assert_eq!(brute.cost, CostK::scalar(Rational::new(22, 10)));
        assert_eq!(brute, solve(&g, &d, &inst).unwrap());
    }

    #[test]
    fn lospre_without_uses() {
        let (g, _, _) = analyse("a := 1; while c do b := a od");
        let inst = derive_instance(&g, &parse_expr("x + y").unwrap(), CostK::ints(1, 0), CostK::ints(0, 1));
        let brute = brute_force_lospre(&g, &inst, &OracleBudget::default()).unwrap();
        assert_eq!(brute.cost, CostK::ZERO);
        assert!(brute.life_set.is_empty());
    }
}
