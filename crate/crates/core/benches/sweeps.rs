use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msqhr::dynamics::numeric_propagator;
use msqhr::linalg::ComplexMatrix;
use msqhr::linkages::{build_linkage, HalfInt, LinkageSpec, PolarizationAmplitudes};
use msqhr::morris_shore::{decompose, InteractionMatrix, DEFAULT_RANK_TOL};
use msqhr::parallel::{self, Execution};
use msqhr::two_state::{DetuningSpec, PulseSpec};
use msqhr::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn random_interactions(count: usize) -> Vec<InteractionMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count)
        .map(|_| {
            let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=4));
            let v = ComplexMatrix::from_fn(n, m, |_, _| {
                Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-3.2..3.2))
            });
            InteractionMatrix::new(v).unwrap()
        })
        .collect()
}

fn decomposition_batch(c: &mut Criterion) {
    let batch = random_interactions(500);
    let mut group = c.benchmark_group("decompose_500");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                parallel::map(black_box(&batch), exec, |v| {
                    decompose(v, DEFAULT_RANK_TOL).unwrap().rank()
                })
            })
        });
    }
    group.finish();
}

fn propagator_columns(c: &mut Criterion) {
    let v = build_linkage(&LinkageSpec::TwoLevel {
        j_lower: HalfInt::from_twice(3),
        j_upper: HalfInt::from_twice(1),
        pol: PolarizationAmplitudes::uniform(8.5),
    })
    .unwrap()
    .matrix;
    let pulse = PulseSpec::sech(1.0).with_window((-20.0, 20.0)).unwrap();
    let detuning = DetuningSpec::new_constant(80.0).unwrap();
    let mut group = c.benchmark_group("j32_numeric_propagator");
    group.sample_size(20);
    for rel_tol in [1e-6, 1e-10] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, rel_tol), &rel_tol, |b, &tol| {
                b.iter(|| numeric_propagator(&v, &pulse, &detuning, tol, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, decomposition_batch, propagator_columns);
criterion_main!(benches);
