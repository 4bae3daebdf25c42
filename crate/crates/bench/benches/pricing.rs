use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use varswap_core::{fair_strike, simulate_strike, McConfig, ModelParams, Numerics, SwapContract};

fn formula(c: &mut Criterion) {
    let params = ModelParams::baseline();
    let mut group = c.benchmark_group("fair_strike");
    for n in [4usize, 52, 252] {
        let contract = SwapContract::new(1.0, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &contract, |b, contract| {
            b.iter(|| fair_strike(black_box(&params), contract, &Numerics::default()).unwrap())
        });
    }
    group.finish();
}

fn ode_steps(c: &mut Criterion) {
    let params = ModelParams::baseline();
    let contract = SwapContract::new(1.0, 12).unwrap();
    let mut group = c.benchmark_group("fair_strike_ode_steps");
    for steps in [32usize, 128, 512] {
        let numerics = Numerics {
            ode_steps: steps,
            ..Numerics::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(steps),
            &numerics,
            |b, numerics| b.iter(|| fair_strike(&params, &contract, numerics).unwrap()),
        );
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let params = ModelParams::baseline();
    let contract = SwapContract::new(1.0, 4).unwrap();
    let config = McConfig {
        n_paths: 10_000,
        ..McConfig::default()
    };
    let mut group = c.benchmark_group("simulate_strike");
    group.sample_size(10);
    group.bench_function("n4_10k_paths", |b| {
        b.iter(|| simulate_strike(&params, &contract, black_box(&config)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, formula, ode_steps, monte_carlo);
criterion_main!(benches);
