#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splc_core::cost::Rational;
use splc_core::gen::{generate, GenConfig};
use splc_core::liveness::VarId;
use splc_core::lospre::{CostK, LospreInstance};
use splc_core::regalloc::SpillWeights;
use splc_core::{Program, VertexId};

pub const REGALOC: &str = include_str!("../fixtures/fig_regaloc.spl");
pub const FIG_EX: &str = include_str!("../fixtures/fig_ex.spl");
pub const FIG_EX_INSTANCE: &str = include_str!("../fixtures/fig_ex.json");
pub const DECOMPO: &str = include_str!("../fixtures/fig_decompo.spl");

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed programs with at most `max_vertices` CFG vertices and
/// `max_vars` variables, one per accepted seed starting at `first_seed`.
pub fn small_programs(count: usize, first_seed: u64, max_vertices: usize, max_vars: usize) -> Vec<(u64, Program)> {
    let mut out = Vec::with_capacity(count);
    let mut seed = first_seed;
    while out.len() < count {
        let statements = 1 + (seed % 7) as usize;
        let src = generate(seed, &GenConfig::small(statements, max_vars));
        let p = Program::parse(&src).expect("generated programs parse");
        if p.graph.vertex_count() <= max_vertices && p.live.vars().len() <= max_vars {
            out.push((seed, p));
        }
        seed += 1;
    }
    out
}

/// Spill weights drawn uniformly from `0..=max` per live (edge, variable).
pub fn random_weights(p: &Program, rng: &mut ChaCha8Rng, max: i64) -> SpillWeights {
    let mut w = SpillWeights::uniform(Rational::from_integer(rng.gen_range(0..=max)));
    for e in p.graph.edges() {
        let live: Vec<VarId> = p.live.at_edge(e.key()).iter().copied().collect();
        for v in live {
            w.set(e.key(), v, Rational::from_integer(rng.gen_range(0..=max)));
        }
    }
    w
}

fn random_cost(rng: &mut ChaCha8Rng, lexicographic: bool) -> CostK {
    if lexicographic {
        CostK::ints(rng.gen_range(0..4), rng.gen_range(0..4))
    } else {
        CostK::scalar(Rational::new(rng.gen_range(0..30), 10))
    }
}

/// Random use/invalidating sets and per-edge and per-vertex costs.
pub fn random_instance(p: &Program, rng: &mut ChaCha8Rng, lexicographic: bool) -> LospreInstance {
    let pick = |rng: &mut ChaCha8Rng, percent: u32| -> BTreeSet<VertexId> {
        p.graph.vertices().iter().copied().filter(|_| rng.gen_range(0..100) < percent).collect()
    };
    let uses = pick(rng, 35);
    let invalidating = pick(rng, 25);
    let edge_default = random_cost(rng, lexicographic);
    let vertex_default = random_cost(rng, lexicographic);
    let mut inst = LospreInstance::new(&p.graph, uses, invalidating, edge_default, vertex_default);
    for e in p.graph.edges() {
        if rng.gen_bool(0.5) {
            inst.edge_costs.insert(e.key(), random_cost(rng, lexicographic));
        }
    }
    for v in p.graph.vertices() {
        if rng.gen_bool(0.5) {
            inst.vertex_costs.insert(*v, random_cost(rng, lexicographic));
        }
    }
    inst
}
