use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;

use rbmq_core::oracle::{self, SimConfig, Side};
use rbmq_core::{ModelParams, TransformBundle};

fn model() -> ModelParams {
    ModelParams::orthogonal([[1.0, 0.35], [0.35, 1.4]], [-0.6, -0.9]).unwrap()
}

fn evaluation(c: &mut Criterion) {
    let b = TransformBundle::new(&model()).unwrap();
    let t = Complex64::new(-1.3, 0.7);
    let u = Complex64::new(-0.4, -2.1);
    c.bench_function("phi1_eval", |bench| bench.iter(|| b.phi1_eval(black_box(t)).unwrap()));
    c.bench_function("phi_eval", |bench| bench.iter(|| b.phi_eval(black_box(t), black_box(u)).unwrap()));
    c.bench_function("bundle_new", |bench| bench.iter(|| TransformBundle::new(black_box(&model())).unwrap()));
}

fn inversion(c: &mut Criterion) {
    let b = TransformBundle::new(&model()).unwrap();
    let grid: Vec<f64> = (1..=50).map(|k| 0.1 * k as f64).collect();
    c.bench_function("invert_nu1_50_points", |bench| {
        bench.iter(|| oracle::invert_transform(&b, Side::Nu1, black_box(&grid)).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let p = model();
    let cfg = SimConfig { horizon: 20.0, burn_in: 1.0, batches: 4, ..SimConfig::default() };
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("bridge_minimum_2e4_steps", |bench| {
        bench.iter_batched(|| cfg.clone(), |cfg| oracle::simulate(&p, &cfg).unwrap(), BatchSize::SmallInput)
    });
    g.finish();
}

criterion_group!(benches, evaluation, inversion, simulation);
criterion_main!(benches);
