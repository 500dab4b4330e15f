//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see the report; the test fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use splc_core::cost::Rational;
use splc_core::frontend::parse_expr;
use splc_core::gen::{generate, GenConfig};
use splc_core::liveness::VarId;
use splc_core::lospre::{derive_instance, solve, CostK, LospreDp, LospreInstance, Mask};
use splc_core::oracle::{brute_force_lospre, brute_force_ra, OracleBudget};
use splc_core::regalloc::{
    canonicalize, min_cost_allocation, min_registers, spill_free, spill_free_with, PartialAssignment, RaOptions, Slot,
    SpillWeights,
};
use splc_core::spl::{Children, DecompKind};
use splc_core::{check_closed, Cost, Program, VertexId};

use common::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ids(v: &[u32]) -> BTreeSet<VertexId> {
    v.iter().map(|i| VertexId(*i)).collect()
}

fn ac1_lospre_worked_example() -> Verdict {
    let start = Instant::now();
    let p = Program::parse(FIG_EX).map_err(|e| e.to_string())?;
    let tenth = CostK::scalar(Rational::new(1, 10));
    let inst = derive_instance(&p.graph, &parse_expr("x + y").unwrap(), CostK::ints(1, 0), tenth);
    ensure(inst.uses == ids(&[2, 4, 5, 7]) && inst.invalidating == ids(&[1, 6, 8]), || {
        format!("U={:?} I={:?}", inst.uses, inst.invalidating)
    })?;
    let dp = LospreDp::new(&p.graph, &p.decomp, &inst);
    let node = |kind: DecompKind, s: u32, t: u32| {
        p.decomp
            .ids()
            .find(|id| {
                let n = p.decomp.node(*id);
                n.kind == kind && n.boundary.s == VertexId(s) && n.boundary.t == VertexId(t)
            })
            .expect("node present")
    };
    let r = |n: i64| CostK::scalar(Rational::new(n, 10));
    let leaf = dp.row(node(DecompKind::AtomicEps, 3, 4));
    let got = [Mask(0), Mask(Mask::S), Mask(Mask::T), Mask(Mask::S | Mask::T)].map(|m| leaf.get(m));
    ensure(got == [r(10), r(1), r(11), r(2)], || format!("leaf [3,4] = {got:?}"))?;
    let prefix = dp.row(node(DecompKind::Series, 1, 3)).get(Mask(Mask::T));
    ensure(prefix == r(12), || format!("dp([1,3],{{3}}) = {prefix}"))?;
    let sol = solve(&p.graph, &p.decomp, &inst).map_err(|e| e.to_string())?;
    let calc: BTreeSet<_> = [(1, 2), (6, 7)].iter().map(|(a, b)| (VertexId(*a), VertexId(*b))).collect();
    ensure(sol.cost == r(22) && sol.life_set == ids(&[2, 3]) && sol.calculating_set == calc, || {
        format!("root {} L={:?} C={:?}", sol.cost, sol.life_set, sol.calculating_set)
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("root 2.2, L={{2,3}}, C={{(1,2),(6,7)}} in {elapsed:?}"))
}

fn ac2_register_figure() -> Verdict {
    let start = Instant::now();
    let p = Program::parse(REGALOC).map_err(|e| e.to_string())?;
    let edge_with = |text: &str| {
        p.graph
            .edges()
            .iter()
            .find(|e| e.labels.iter().any(|l| l.to_string() == text))
            .unwrap_or_else(|| panic!("no edge labelled {text}"))
    };
    let b = p.graph.boundary();
    let body = match p.decomp.node(p.decomp.root()).children {
        Children::One(body) => p.decomp.node(body).boundary,
        _ => return Err("root is not a loop".into()),
    };
    let fi = edge_with("b := f + c").src;
    let then = edge_with("e := e - 1").src;
    let annotated: Vec<(&str, VertexId, &[&str])> = vec![
        ("S", b.s, &["b", "c", "f"]),
        ("T", b.t, &[]),
        ("B", b.b, &[]),
        ("C", b.c, &[]),
        ("C1", body.c, &["b", "c", "f"]),
        ("B1", body.b, &[]),
        ("1", edge_with("a := b + c").src, &["b", "c", "f"]),
        ("2", edge_with("d := -a").src, &["a", "c", "f"]),
        ("3", edge_with("e := d + f").src, &["c", "d", "f"]),
        ("if", edge_with("e := d + f").dst, &["c", "d", "e", "f"]),
        ("then", then, &["c", "e", "f"]),
        ("fi", fi, &["c", "f"]),
        ("5", edge_with("b := f + c").dst, &["b", "c", "f"]),
    ];
    for (name, v, expected) in &annotated {
        let got = p.live.names_at_vertex(*v);
        ensure(got == *expected, || format!("L({name}) = {got:?}, expected {expected:?}"))?;
    }
    let mut edges: Vec<[&str; 2]> = p.interference.edge_names();
    edges.sort();
    let mut listed = vec![
        ["b", "c"],
        ["b", "f"],
        ["c", "f"],
        ["a", "c"],
        ["a", "f"],
        ["c", "d"],
        ["d", "f"],
        ["c", "e"],
        ["d", "e"],
        ["e", "f"],
    ];
    listed.sort();
    ensure(edges == listed, || format!("interference {edges:?}"))?;
    let min = min_registers(p.ra_problem(), 20);
    ensure(min == Some(4), || format!("min_registers = {min:?}"))?;
    ensure(!spill_free(p.ra_problem(), 3).feasible, || "spill_free(3) feasible".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} live sets, 10 interference edges, min_registers 4, r=3 infeasible in {elapsed:?}", annotated.len()))
}

fn ac3_ra_oracle() -> Verdict {
    let start = Instant::now();
    let budget = OracleBudget::default();
    let programs = small_programs(200, 1_000, 12, 4);
    let mut checks = 0;
    for (seed, p) in &programs {
        let mut rng = rng(*seed);
        let weighted = random_weights(p, &mut rng, 5);
        let unit = SpillWeights::unit();
        for r in [1, 2] {
            for (name, model) in [("unit", &unit), ("random", &weighted)] {
                let dp = min_cost_allocation(p.ra_problem(), model, r);
                let brute = brute_force_ra(&p.graph, &p.live, &p.interference, model, r, &budget)
                    .map_err(|e| format!("seed {seed}: {e}"))?;
                ensure(dp.cost == brute.cost, || {
                    format!("seed {seed} r={r} {name}: dp {} brute {}", dp.cost, brute.cost)
                })?;
                ensure(dp.recomputed_cost() == dp.cost, || format!("seed {seed} r={r} {name}: witness cost differs"))?;
                checks += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} programs, {checks} comparisons in {elapsed:?}", programs.len()))
}

fn ac4_lospre_oracle() -> Verdict {
    let start = Instant::now();
    let budget = OracleBudget::default();
    let programs = small_programs(200, 50_000, 12, 4);
    let mut checks = 0;
    for (seed, p) in &programs {
        let mut rng = rng(*seed);
        for lexicographic in [false, true] {
            let inst: LospreInstance = random_instance(p, &mut rng, lexicographic);
            let dp = solve(&p.graph, &p.decomp, &inst).map_err(|e| e.to_string())?;
            let brute = brute_force_lospre(&p.graph, &inst, &budget).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(dp.cost == brute.cost, || {
                format!("seed {seed} lex={lexicographic}: dp {} brute {}", dp.cost, brute.cost)
            })?;
            checks += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{checks} instances in {elapsed:?}"))
}

fn ac5_structure() -> Verdict {
    let mut open = 0;
    let count = 500;
    for seed in 0..count {
        let mut src = generate(seed, &GenConfig { statements: 1 + (seed % 40) as usize, ..GenConfig::default() });
        match seed % 5 {
            0 => src = format!("{src}; break"),
            1 => src = format!("if z then continue else skip fi; {src}"),
            _ => {}
        }
        let p = Program::parse(&src).map_err(|e| format!("seed {seed}: {e}"))?;
        let closed = check_closed(&p.ast);
        open += usize::from(!closed);
        ensure(closed == p.graph.is_closed(), || format!("seed {seed}: closedness disagrees"))?;
        p.decomp.verify(&p.graph).map_err(|e| format!("seed {seed}: {e}"))?;
        for id in p.decomp.ids() {
            let n = p.decomp.node(id);
            let size = |c| p.decomp.vertices_of(c).len();
            let expected = match (n.kind, &n.children) {
                (_, Children::None) => 4,
                (DecompKind::Series, Children::Two(a, b)) => size(*a) + size(*b) - 3,
                (DecompKind::Parallel, Children::Two(a, b)) => size(*a) + size(*b) - 4,
                (DecompKind::Loop, Children::One(a)) => size(*a) + 4,
                _ => return Err(format!("seed {seed}: malformed node {id:?}")),
            };
            ensure(size(id) == expected && n.vertex_count == expected, || {
                format!("seed {seed}: node {id:?} has {} vertices, expected {expected}", size(id))
            })?;
            if let (DecompKind::Loop, Children::One(body)) = (n.kind, &n.children) {
                let inner = p.decomp.node(*body).boundary;
                let live = |v| p.live.at_vertex(v);
                ensure(
                    live(inner.b).is_subset(live(n.boundary.t))
                        && live(inner.t).is_subset(live(n.boundary.s))
                        && live(inner.c).is_subset(live(n.boundary.s)),
                    || format!("seed {seed}: loop containment fails at {id:?}"),
                )?;
            }
        }
        for (v, set) in p.live.vertices() {
            let vars: Vec<VarId> = set.iter().copied().collect();
            for (i, a) in vars.iter().enumerate() {
                for b in &vars[i + 1..] {
                    ensure(p.interference.interferes(*a, *b), || format!("seed {seed}: L({v}) is not a clique"))?;
                }
            }
        }
    }
    Ok(format!("{count} programs ({open} open)"))
}

fn median_time(n: usize, runs: usize) -> Duration {
    let src = generate(1, &GenConfig::with_statements(n));
    let e = parse_expr("a + b").unwrap();
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let start = Instant::now();
            let ast = splc_core::parse(&src).unwrap();
            let (g, d) = splc_core::cfg_of(&ast);
            let inst = derive_instance(&g, &e, CostK::ints(1, 0), CostK::ints(0, 1));
            let sol = solve(&g, &d, &inst).unwrap();
            std::hint::black_box(sol);
            start.elapsed()
        })
        .collect();
    times.sort();
    times[runs / 2]
}

fn ac6_scaling() -> Verdict {
    let t: Vec<Duration> = [1000, 2000, 4000].iter().map(|n| median_time(*n, 5)).collect();
    let ratios = [t[1].as_secs_f64() / t[0].as_secs_f64(), t[2].as_secs_f64() / t[1].as_secs_f64()];
    ensure(ratios.iter().all(|r| *r < 3.0), || format!("times {t:?}, ratios {ratios:?}"))?;
    let src = generate(10_000, &GenConfig::with_statements(10_000));
    let start = Instant::now();
    let ast = splc_core::parse(&src).map_err(|e| e.to_string())?;
    let (g, d) = splc_core::cfg_of(&ast);
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("10k statements took {elapsed:?}"))?;
    Ok(format!(
        "times {:?}, ratios {:.2}/{:.2}; 10k statements -> {} vertices, {} nodes in {elapsed:?}",
        t,
        ratios[0],
        ratios[1],
        g.vertex_count(),
        d.len()
    ))
}

fn pressure_programs(count: usize) -> Vec<(u64, Program, u32)> {
    let mut out = Vec::new();
    let mut seed = 7_000u64;
    while out.len() < count {
        let src =
            generate(seed, &GenConfig { statements: 6 + (seed % 10) as usize, variables: 5, ..GenConfig::default() });
        let p = Program::parse(&src).unwrap();
        let pressure = p.live.max_pressure() as u32;
        if pressure >= 2 {
            out.push((seed, p, pressure - 1));
        }
        seed += 1;
    }
    out
}

fn ac7_early_exit() -> Verdict {
    let cases = pressure_programs(60);
    for (seed, p, r) in &cases {
        let quick = spill_free_with(p.ra_problem(), *r, RaOptions { canonical: false, early_exit: true });
        let full = spill_free_with(p.ra_problem(), *r, RaOptions { canonical: false, early_exit: false });
        ensure(!quick.feasible && quick.stats.exited_early, || format!("seed {seed}: early exit did not trigger"))?;
        ensure(quick.feasible == full.feasible && !full.stats.exited_early, || {
            format!("seed {seed} r={r}: early exit {} full {}", quick.feasible, full.feasible)
        })?;
    }
    Ok(format!("{} programs above pressure agree", cases.len()))
}

fn ac8_canonical() -> Verdict {
    let mut suite: Vec<(String, Program)> = vec![("figure".into(), Program::parse(REGALOC).unwrap())];
    suite.extend(small_programs(200, 1_000, 12, 4).into_iter().map(|(s, p)| (format!("small {s}"), p)));
    suite.extend(pressure_programs(60).into_iter().map(|(s, p, _)| (format!("pressure {s}"), p)));
    let mut verdicts = 0;
    for (name, p) in &suite {
        let top = p.live.max_pressure() as u32 + 1;
        for r in 1..=top.min(5) {
            let plain = spill_free_with(p.ra_problem(), r, RaOptions { canonical: false, early_exit: false });
            let canon = spill_free_with(p.ra_problem(), r, RaOptions { canonical: true, early_exit: false });
            ensure(plain.feasible == canon.feasible, || format!("{name} r={r}: verdict changed"))?;
            ensure(canon.stats.stored_entries <= plain.stats.stored_entries, || {
                format!("{name} r={r}: {} > {} entries", canon.stats.stored_entries, plain.stats.stored_entries)
            })?;
            if let Some(f) = &canon.assignment {
                ensure(f.is_valid(&p.interference), || format!("{name} r={r}: canonical witness invalid"))?;
            }
            verdicts += 1;
        }
    }
    let mut rng = rng(99);
    for i in 0..1000 {
        let n = rng.gen_range(0..8u32);
        let mut pairs = Vec::new();
        for v in (0..n).filter(|_| rng.gen_bool(0.8)).collect::<Vec<_>>() {
            let slot = if rng.gen_bool(0.2) { Slot::Spill } else { Slot::Reg(rng.gen_range(0..6)) };
            pairs.push((VarId(v), slot));
        }
        let f = PartialAssignment::from_pairs(pairs);
        let mut order: Vec<VarId> = (0..n).map(VarId).collect();
        order.reverse();
        let once = canonicalize(&f, &order);
        ensure(canonicalize(&once, &order) == once, || format!("case {i}: not idempotent on {f}"))?;
        ensure(f.canonicalize().canonicalize() == f.canonicalize(), || format!("case {i}: default order"))?;
    }
    Ok(format!("{verdicts} verdicts over {} programs unchanged; 1000 idempotence checks", suite.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("AC1 LOSPRE worked example", ac1_lospre_worked_example),
        ("AC2 register allocation figure", ac2_register_figure),
        ("AC3 RA oracle equivalence", ac3_ra_oracle),
        ("AC4 LOSPRE oracle equivalence", ac4_lospre_oracle),
        ("AC5 structural properties", ac5_structure),
        ("AC6 scaling", ac6_scaling),
        ("AC7 spill-free early exit", ac7_early_exit),
        ("AC8 canonical tables", ac8_canonical),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}

#[test]
fn spill_free_agrees_with_zero_cost_minimum() {
    for (seed, p) in small_programs(30, 3_000, 12, 4) {
        for r in 0..3 {
            let sf = spill_free(p.ra_problem(), r).feasible;
            let colourable =
                splc_core::oracle::greedy_coloring_check(&p.interference, r, &OracleBudget::default()).unwrap();
            let live_vars: BTreeSet<VarId> = p.live.vertices().flat_map(|(_, s)| s.iter().copied()).collect();
            if live_vars.len() == p.live.vars().len() {
                assert_eq!(sf, colourable, "seed {seed} r={r}");
            }
            assert_eq!(min_cost_allocation(p.ra_problem(), &splc_core::regalloc::SpillFree, r).cost == Cost::ZERO, sf);
        }
    }
}
