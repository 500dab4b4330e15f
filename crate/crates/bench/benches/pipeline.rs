use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use splc_bench::{lospre_instance, program, ra_program, source, SIZES};
use splc_core::liveness::compute_liveness;
use splc_core::lospre::solve;
use splc_core::regalloc::spill_free;
use splc_core::{cfg_of, parse};

fn frontend(c: &mut Criterion) {
    let mut g = c.benchmark_group("frontend");
    for n in SIZES {
        let src = source(n);
        let ast = parse(&src).unwrap();
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("parse", n), &src, |b, s| b.iter(|| parse(black_box(s)).unwrap()));
        g.bench_with_input(BenchmarkId::new("cfg_of", n), &ast, |b, a| b.iter(|| cfg_of(black_box(a))));
    }
    g.finish();
}

fn analyses(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyses");
    for n in SIZES {
        let p = program(n);
        let inst = lospre_instance(&p);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("liveness", n), &p, |b, p| {
            b.iter(|| compute_liveness(black_box(&p.graph)))
        });
        g.bench_with_input(BenchmarkId::new("lospre", n), &p, |b, p| {
            b.iter(|| solve(&p.graph, &p.decomp, black_box(&inst)).unwrap())
        });
    }
    g.finish();
}

fn regalloc(c: &mut Criterion) {
    let mut g = c.benchmark_group("regalloc");
    for n in [50, 200] {
        let p = ra_program(n);
        for r in [2, 3] {
            g.bench_with_input(BenchmarkId::new(format!("spill_free/r{r}"), n), &p, |b, p| {
                b.iter(|| spill_free(p.ra_problem(), black_box(r)))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, frontend, analyses, regalloc);
criterion_main!(benches);
