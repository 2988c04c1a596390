use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use pdcert_core::prelude::*;
use pdcert_core::solvers::SolverOptions;

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    let cases = [
        ("ppm", Algorithm::Ppm, InstanceSpec::QuadraticSaddle { n: 20, m: 10, seed: 1 }, EtaChoice::Explicit(1.0)),
        ("pdhg", Algorithm::Pdhg, InstanceSpec::Lasso { m: 10, n: 20, seed: 1 }, EtaChoice::AUTO),
        ("admm", Algorithm::Admm, InstanceSpec::AdmmConsensus { m: 10, n: 20, seed: 1 }, EtaChoice::Explicit(1.0)),
        (
            "linearized_pdhg",
            Algorithm::LinearizedPdhg,
            InstanceSpec::QuadraticSaddle { n: 20, m: 10, seed: 1 },
            EtaChoice::AUTO,
        ),
    ];
    for (name, alg, spec, eta) in cases {
        let (prob, z0) = make_instance(&spec).unwrap();
        let step = pdcert_core::solvers::resolve_eta(alg, &prob, eta).unwrap();
        let solver = Solver::new(alg, &prob, step, SolverOptions::default()).unwrap();
        group.bench_function(name, |b| b.iter(|| solver.step(black_box(&z0), None).unwrap()));
    }
    group.finish();
}

fn certify(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify");
    for iters in [100usize, 1000] {
        let (prob, z0) = make_instance(&InstanceSpec::Lasso { m: 10, n: 20, seed: 1 }).unwrap();
        let t = run(Algorithm::Pdhg, &prob, &z0, EtaChoice::AUTO, iters, &RunOptions::default()).unwrap();
        let zstar = saddle_oracle(&prob).unwrap().zstar;
        group.bench_with_input(BenchmarkId::new("lasso_pdhg", iters), &t, |b, t| {
            b.iter(|| certify_run(t, &prob, &t.metric, &zstar, None).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (quad, _) = make_instance(&InstanceSpec::QuadraticSaddle { n: 20, m: 10, seed: 1 }).unwrap();
    c.bench_function("oracle/kkt_quadratic_30", |b| b.iter(|| saddle_oracle(black_box(&quad)).unwrap()));
}

criterion_group!(benches, steps, certify, oracle);
criterion_main!(benches);
