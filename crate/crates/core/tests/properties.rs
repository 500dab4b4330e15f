mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use splc_core::cost::{format_rational, parse_rational, Rational};
use splc_core::frontend::pretty;
use splc_core::gen::{generate, GenConfig};
use splc_core::liveness::VarId;
use splc_core::lospre::{total_cost, CostK, LospreDp, LospreInstance, Mask};
use splc_core::oracle::{brute_force_ra, OracleBudget};
use splc_core::regalloc::{canonicalize, min_cost_allocation, PartialAssignment, Slot, SpillWeights};
use splc_core::spl::DecompId;
use splc_core::{parse, Cost, Program, VertexId};

use common::{random_instance, random_weights, rng};

fn small_program(seed: u64, statements: usize, vars: usize) -> Program {
    Program::parse(&generate(seed, &GenConfig::small(statements, vars))).unwrap()
}

/// `min` over `L ⊆ V_u` with `L ∩ Γ_u = X` of the cost restricted to the
/// subgraph at `id`, by enumeration.
fn restricted_optimum(p: &Program, inst: &LospreInstance, id: DecompId, mask: Mask) -> CostK {
    let boundary = p.decomp.node(id).boundary;
    let fixed: BTreeSet<VertexId> = mask.vertices(boundary).collect();
    let inner: Vec<VertexId> = p.decomp.vertices_of(id).into_iter().filter(|v| !boundary.contains(*v)).collect();
    let edges = p.decomp.edges_of(id);
    (0..1u32 << inner.len())
        .map(|bits| {
            let mut life = fixed.clone();
            life.extend((0..inner.len()).filter(|i| bits >> i & 1 == 1).map(|i| inner[i]));
            let calc: CostK = edges
                .iter()
                .filter(|(x, y)| {
                    let held = life.contains(x) && !inst.invalidating.contains(x);
                    !held && (inst.uses.contains(y) || life.contains(y))
                })
                .map(|e| inst.edge_cost(*e))
                .sum();
            calc + life.iter().map(|v| inst.vertex_cost(*v)).sum()
        })
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pretty_printing_round_trips(seed in any::<u64>(), n in 1usize..40) {
        let src = generate(seed, &GenConfig::with_statements(n));
        let ast = parse(&src).unwrap();
        let again = parse(&pretty(&ast)).unwrap();
        prop_assert!(ast.same_shape(&again), "{}", src);
    }

    #[test]
    fn lospre_tables_match_their_definition(seed in any::<u64>(), n in 1usize..6, lex in any::<bool>()) {
        let p = small_program(seed, n, 3);
        prop_assume!(p.graph.vertex_count() <= 14);
        let inst = random_instance(&p, &mut rng(seed), lex);
        let dp = LospreDp::new(&p.graph, &p.decomp, &inst);
        for id in p.decomp.ids() {
            for mask in Mask::all() {
                prop_assert_eq!(dp.row(id).get(mask), restricted_optimum(&p, &inst, id, mask), "node {:?} mask {}", id, mask);
            }
        }
        let sol = dp.solve();
        prop_assert_eq!(total_cost(&p.graph, &inst, &sol.life_set), sol.cost);
    }

    #[test]
    fn ra_matches_brute_force(seed in any::<u64>(), n in 1usize..8, r in 0u32..3) {
        let p = small_program(seed, n, 4);
        let model = random_weights(&p, &mut rng(seed), 4);
        let dp = min_cost_allocation(p.ra_problem(), &model, r);
        let brute = brute_force_ra(&p.graph, &p.live, &p.interference, &model, r, &OracleBudget::default()).unwrap();
        prop_assert_eq!(dp.cost, brute.cost);
        let witness = dp.assignment.as_ref().expect("spill weights are finite");
        prop_assert!(witness.is_valid(&p.interference));
        prop_assert!(witness.slots().all(|s| s.register().is_none_or(|k| k < r)));
        prop_assert_eq!(dp.recomputed_cost(), dp.cost);
    }

    #[test]
    fn unit_spill_cost_is_zero_with_enough_registers(seed in any::<u64>(), n in 1usize..20) {
        let p = Program::parse(&generate(seed, &GenConfig::with_statements(n))).unwrap();
        let r = p.live.vars().len() as u32;
        prop_assert_eq!(min_cost_allocation(p.ra_problem(), &SpillWeights::unit(), r).cost, Cost::ZERO);
    }

    #[test]
    fn canonical_form_forgets_register_names(
        slots in proptest::collection::vec(proptest::option::of(0u32..5), 0..7),
        shift in 1u32..4,
    ) {
        let make = |rename: &dyn Fn(u32) -> u32| {
            PartialAssignment::from_pairs(slots.iter().enumerate().map(|(i, s)| {
                (VarId(i as u32), s.map_or(Slot::Spill, |k| Slot::Reg(rename(k))))
            }))
        };
        let f = make(&|k| k);
        let g = make(&|k| (k + shift) % 5);
        let order: Vec<VarId> = (0..slots.len() as u32).map(VarId).collect();
        let cf = canonicalize(&f, &order);
        prop_assert_eq!(&cf, &canonicalize(&g, &order));
        prop_assert_eq!(&canonicalize(&cf, &order), &cf);
    }

    #[test]
    fn rationals_print_and_parse_back(num in -10_000i64..10_000, den in 1i64..200) {
        let q = Rational::new(num, den);
        prop_assert_eq!(parse_rational(&format_rational(&q)), Some(q));
    }
}
