use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use armcal::bench::{generate, BenchConfig};
use armcal::identification::{objective, DeltaVector, DELTA_LEN};
use armcal::optimizer::numeric_gradient;
use armcal::parallel::Execution;

fn objective_and_gradient(c: &mut Criterion) {
    let config = BenchConfig {
        seed: 3,
        pixel_noise_sigma: 0.2,
        ..BenchConfig::default()
    };
    let (truth, dataset) = generate(&config).expect("bench dataset");
    let seed = truth.nominal;
    let delta = DeltaVector::zero();

    let mut group = c.benchmark_group("objective");
    for execution in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{execution:?}")),
            &execution,
            |b, &e| b.iter(|| objective(black_box(&delta), &seed, &dataset, e).unwrap()),
        );
    }
    group.finish();

    let mut group = c.benchmark_group("gradient");
    group.sample_size(20);
    for execution in [Execution::Sequential, Execution::Parallel] {
        let f = |x: &[f64]| {
            objective(
                &DeltaVector::from_slice(x)?,
                &seed,
                &dataset,
                Execution::Sequential,
            )
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{execution:?}")),
            &execution,
            |b, &e| b.iter(|| numeric_gradient(&f, black_box(&[0.0; DELTA_LEN]), 1e-6, e).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, objective_and_gradient);
criterion_main!(benches);
