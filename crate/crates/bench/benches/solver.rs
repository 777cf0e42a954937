use criterion::{criterion_group, criterion_main, Criterion};
use cuspwave::{solve_lowest, Shape, SolverMethod, SolverOptions};
use cuspwave_bench::pair_operator;

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_state");
    group.sample_size(10);
    let op = pair_operator(5, Shape::Cubic);
    for method in [SolverMethod::Dense, SolverMethod::Iterative] {
        let options = SolverOptions {
            method,
            ..SolverOptions::lowest(1)
        };
        group.bench_function(format!("{method:?} M=5"), |b| {
            b.iter(|| solve_lowest(&op, &options).unwrap())
        });
    }
    let op = pair_operator(12, Shape::Cubic);
    group.bench_function("Iterative M=12", |b| {
        b.iter(|| solve_lowest(&op, &SolverOptions::lowest(1)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
