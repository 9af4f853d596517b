use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paramlearn::erm::{build_dual, Family};
use paramlearn::families::scl_sweep;
use paramlearn::instances::{gen_clustering_smooth, gen_knapsack_smooth};
use paramlearn::{merge_sum, PiecewiseConstant, RandomTape, TapedInstance};
use std::hint::black_box;

fn knapsack(n: usize, seed: u64) -> TapedInstance {
    let tape = RandomTape::new(seed, 0);
    TapedInstance::new(gen_knapsack_smooth(n, 4.0, 5.0, &tape).unwrap(), tape.derive(1))
}

fn knapsack_dual(c: &mut Criterion) {
    let mut group = c.benchmark_group("knapsack_dual");
    for n in [10, 20, 40] {
        let x = knapsack(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| build_dual(&Family::Knapsack, black_box(x), 0.0, 5.0, 0).unwrap())
        });
    }
    group.finish();
}

fn scl(c: &mut Criterion) {
    let mut group = c.benchmark_group("scl_sweep");
    group.sample_size(20);
    for n in [10, 20] {
        let x = gen_clustering_smooth(n, 1.0, 3.0, 3, &RandomTape::new(2, 0)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| scl_sweep(black_box(x), 0.0, 1.0, 10_000_000).unwrap())
        });
    }
    group.finish();
}

fn merge(c: &mut Criterion) {
    let fs: Vec<PiecewiseConstant> = (0..200)
        .map(|s| build_dual(&Family::Knapsack, &knapsack(15, s), 0.0, 5.0, 0).unwrap().f)
        .collect();
    c.bench_function("merge_sum_200", |b| b.iter(|| merge_sum(black_box(&fs)).unwrap()));
}

criterion_group!(benches, knapsack_dual, scl, merge);
criterion_main!(benches);
