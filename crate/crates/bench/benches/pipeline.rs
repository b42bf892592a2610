use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cagasp_core::cag::{cag_rewrite, CagOptions};
use cagasp_core::ground::ground;
use cagasp_core::hcp::{self, batch_facts, gen_instance, InstanceSpec};
use cagasp_core::incremental::{incremental_solve, InternalEngine, VerifyFinal};
use cagasp_core::solve::solve;

fn rewrite(c: &mut Criterion) {
    let p = hcp::encoding();
    c.bench_function("cag_rewrite/hcp", |b| {
        b.iter(|| cag_rewrite(black_box(&p), &CagOptions::default()))
    });
}

fn grounding(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground");
    for persons in [1, 2, 3] {
        let inst = gen_instance(&InstanceSpec::new(persons));
        for (name, enc) in [("plain", hcp::encoding()), ("cag", hcp::cag_encoding())] {
            let p = enc.with_facts(inst.clone());
            group.bench_with_input(BenchmarkId::new(name, persons), &p, |b, p| {
                b.iter(|| ground(p).unwrap())
            });
        }
    }
    group.finish();
}

fn solving(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_first");
    for persons in [1, 2, 3] {
        let g = ground(&hcp::encoding().with_facts(gen_instance(&InstanceSpec::new(persons)))).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(persons), &g, |b, g| {
            b.iter(|| solve(g, 1).unwrap())
        });
    }
    group.finish();
}

fn incremental(c: &mut Criterion) {
    let mut group = c.benchmark_group("incremental_ppi1");
    group.sample_size(10);
    let inst = gen_instance(&InstanceSpec::new(5));
    let batches = batch_facts(&inst, 1);
    for (name, enc) in [("plain", hcp::encoding()), ("cag", hcp::cag_encoding())] {
        group.bench_function(name, |b| {
            b.iter(|| incremental_solve(&enc, &batches, &InternalEngine::default(), VerifyFinal::Off).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rewrite, grounding, solving, incremental);
criterion_main!(benches);
