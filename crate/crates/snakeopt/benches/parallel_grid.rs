//! Compares the sequential and rayon-parallel experiment-grid runners on
//! a small but non-trivial grid.

use criterion::{criterion_group, criterion_main, Criterion};

use snakeopt::benchfns::make_suite;
use snakeopt::harness::{
    run_cells_parallel, run_cells_sequential, AlgorithmSpec, BudgetMode, ExperimentSpec,
};

fn bench_spec() -> ExperimentSpec {
    ExperimentSpec {
        algorithms: vec![
            AlgorithmSpec::parse("so").unwrap(),
            AlgorithmSpec::parse("pso").unwrap(),
            AlgorithmSpec::parse("de").unwrap(),
        ],
        function_slots: vec![0, 3, 7],
        dim: 10,
        pop_size: 20,
        max_iter: 60,
        trials: 4,
        master_seed: 11,
        budget_mode: BudgetMode::UniformPop,
    }
}

fn grid_benches(c: &mut Criterion) {
    let spec = bench_spec();
    let suite = make_suite(spec.dim).unwrap();
    let mut group = c.benchmark_group("experiment_grid");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_cells_sequential(&spec, &suite))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| run_cells_parallel(&spec, &suite))
    });
    group.finish();
}

criterion_group!(benches, grid_benches);
criterion_main!(benches);
