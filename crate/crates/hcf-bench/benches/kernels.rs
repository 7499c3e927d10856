//! Benchmarks for the hot kernels: truncated-series multiplication, frame
//! assembly (metric, connection, torsion, curvature at a point), the flow
//! right-hand side, the Griffiths minimum, and a full Runge–Kutta flow step.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use hcf_core::flow::{flow_step, AnsatzFamily, FlowState};
use hcf_core::jets::ComplexJet;
use hcf_core::metrics;
use hcf_core::positivity::{min_griffiths, GriffithsOptions};
use hcf_core::{compute_frame, evolution_rhs, CurvatureTensor, FlowVariant};

fn sample_point(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::from_polar(0.8 + 0.1 * i as f64, 0.7 * (i as f64 + 1.0)))
        .collect()
}

fn exponents(n: usize, budget: usize) -> Vec<Vec<u8>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for e in 0..=budget as u8 {
        for mut tail in exponents(n - 1, budget - e as usize) {
            tail.insert(0, e);
            out.push(tail);
        }
    }
    out
}

fn dense_jet(n: usize, order: usize, seed: u64) -> ComplexJet {
    let center = sample_point(n);
    let mut jet = ComplexJet::constant(&center, order, Complex64::new(1.0, 0.0));
    let mut state = seed;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for holo in exponents(n, order) {
        let used: usize = holo.iter().map(|&e| e as usize).sum();
        for anti in exponents(n, order - used) {
            let c = Complex64::new(next(), next());
            jet.set_coeff(&holo, &anti, c);
        }
    }
    jet
}

fn bench_jet_multiply(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet_multiply");
    for &(n, order) in &[(2usize, 4usize), (3, 4)] {
        let a = dense_jet(n, order, 1);
        let b = dense_jet(n, order, 2);
        group.bench_function(format!("n{n}_order{order}"), |bench| {
            bench.iter(|| black_box(&a).mul(black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn bench_compute_frame(c: &mut Criterion) {
    let mut group = c.benchmark_group("compute_frame");
    for &n in &[2usize, 3] {
        let m = metrics::hopf_family(n, 1.0, 0.3).unwrap();
        let z = sample_point(n);
        group.bench_function(format!("hopf_n{n}"), |bench| {
            bench.iter(|| compute_frame(black_box(&m), black_box(&z), 0).unwrap())
        });
    }
    group.finish();
}

fn bench_evolution_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolution_rhs");
    for &n in &[2usize, 3] {
        let m = metrics::hopf_family(n, 1.0, 0.3).unwrap();
        let z = sample_point(n);
        let f = compute_frame(&m, &z, 0).unwrap();
        group.bench_function(format!("hopf_n{n}"), |bench| {
            bench.iter(|| evolution_rhs(black_box(&f)))
        });
    }
    group.finish();
}

fn bench_min_griffiths(c: &mut Criterion) {
    let mut group = c.benchmark_group("min_griffiths");
    group.sample_size(20);
    for &n in &[2usize, 3] {
        let m = metrics::hopf_family(n, 1.0, 0.3).unwrap();
        let z = sample_point(n);
        let f = compute_frame(&m, &z, 0).unwrap();
        let u = CurvatureTensor::from_frame(&f);
        let g = f.metric_value();
        let opts =
            GriffithsOptions { restarts: 8, grid_fallback: false, ..GriffithsOptions::default() };
        group.bench_function(format!("hopf_n{n}_restarts8"), |bench| {
            bench.iter(|| min_griffiths(black_box(&u), black_box(&g), &opts).unwrap())
        });
    }
    group.finish();
}

fn bench_flow_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_step");
    group.sample_size(20);
    let state = FlowState::ansatz(AnsatzFamily::Hopf { n: 2, a: 1.0, b: 0.3 });
    group.bench_function("hopf_n2_ansatz_rk4", |bench| {
        bench.iter_batched(
            || state.clone(),
            |s| flow_step(&s, 1e-3, FlowVariant::Hcf).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(
    kernels,
    bench_jet_multiply,
    bench_compute_frame,
    bench_evolution_rhs,
    bench_min_griffiths,
    bench_flow_step
);
criterion_main!(kernels);
