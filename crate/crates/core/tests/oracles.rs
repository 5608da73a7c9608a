//! Cross-checks between the explicit transforms and the independent oracles.

mod common;

use rand::Rng;
use rbmq_core::checks;
use rbmq_core::kernel;
use rbmq_core::oracle::{self, BoundaryInverter, SimConfig, Side};
use rbmq_core::{Complex64 as C64, ModelParams, TransformBundle, TransformError, IDENTITY};

fn bundle(sigma: [[f64; 2]; 2], mu: [f64; 2]) -> TransformBundle {
    TransformBundle::new(&ModelParams::orthogonal(sigma, mu).unwrap()).unwrap()
}

#[test]
fn inversion_recovers_the_transform() {
    // forward quadrature of the inverted density against φ1 at negative θ
    let b = bundle([[1.0, 0.4], [0.4, 1.3]], [-0.6, -0.9]);
    let inv = BoundaryInverter::new(&b, Side::Nu1).unwrap();
    let rho = inv.rate();
    // ∫ e^{θx} ν(x) dx = ∫ e^{(θ-ρ)x} g(x) dx with g = e^{ρx}ν; substitute x = u²
    // to absorb the possible x^{-1/2} at the origin
    let n = 4000;
    let umax: f64 = 12.0;
    let h = umax / n as f64;
    let gs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let u = (k as f64 + 0.5) * h;
            (u, inv.compensated(u * u).unwrap())
        })
        .collect();
    for theta in [-0.1, -0.5, -1.0, -2.0, -4.0] {
        let integral: f64 = gs.iter().map(|(u, g)| ((theta - rho) * u * u).exp() * g * 2.0 * u * h).sum();
        let exact = b.phi1_eval(C64::new(theta, 0.0)).unwrap().re;
        assert!((integral - exact).abs() < 5e-3 * exact, "θ={theta}: {integral} vs {exact}");
    }
}

#[test]
fn inverted_mass_matches_transform_at_origin() {
    let b = bundle(IDENTITY, [-1.0, -1.0]);
    let grid: Vec<f64> = (1..=400).map(|k| 0.025 * k as f64).collect();
    let t = oracle::invert_transform(&b, Side::Nu1, &grid).unwrap();
    // head [0, 0.025] and tail beyond 10 from the known exponential shape
    let head = 0.5 * 0.025 * (2.0 + t.values[0]);
    let tail = t.values.last().unwrap() / 2.0;
    let mass = head + t.trapezoid_mass() + tail;
    assert!((mass - 1.0).abs() < 5e-3, "{mass}");
}

#[test]
fn second_boundary_density_uses_exchanged_model() {
    let p = ModelParams::orthogonal([[0.8, 0.0], [0.0, 1.7]], [-0.5, -1.2]).unwrap();
    let b = TransformBundle::new(&p).unwrap();
    let f = oracle::DiagonalClosedForms::new(&p).unwrap();
    let grid = [0.2, 0.9, 2.5, 6.0];
    let t = oracle::invert_transform(&b, Side::Nu2, &grid).unwrap();
    for (x, v) in grid.iter().zip(&t.values) {
        assert!((v - f.nu2(*x)).abs() < 1e-9 * f.nu2(*x));
    }
}

#[test]
fn continuation_holds_on_random_left_points() {
    let mut rng = common::rng(31);
    for _ in 0..5 {
        let p = common::random_model(&mut rng);
        let b = TransformBundle::new(&p).unwrap();
        let e = checks::continuation_error(&b, &mut rng, 100).unwrap();
        assert!(e < 1e-9, "{e}");
    }
}

#[test]
fn continuation_near_branch_point_is_ambiguous() {
    let b = bundle([[1.0, 0.3], [0.3, 1.0]], [-1.0, -0.5]);
    let t2m = b.scalars().theta2_minus;
    assert!(matches!(
        b.continuation_check(C64::new(t2m, 0.0)),
        Err(TransformError::BranchAmbiguity { .. })
    ));
}

#[test]
fn psi1_vanishes_at_infinity_in_domain() {
    let b = bundle([[1.0, -0.4], [-0.4, 2.0]], [-0.8, -0.6]);
    let p = *b.params();
    for ang in [2.0, 3.0, 3.1, -2.5] {
        let mut prev = f64::INFINITY;
        for r in [1e3, 1e6] {
            let t = C64::from_polar(r, ang);
            assert!(kernel::contains_g_r(&p, t));
            let v = b.psi1_eval(t).unwrap().norm();
            assert!(v < prev && v < 1e-2, "{t}: {v}");
            prev = v;
        }
    }
}

#[test]
fn gluing_function_is_injective_on_samples() {
    let b = bundle([[1.0, 0.6], [0.6, 1.0]], [-0.7, -1.0]);
    let p = *b.params();
    let mut rng = common::rng(5);
    let mut pts = Vec::new();
    while pts.len() < 200 {
        let t = C64::new(rng.gen_range(-8.0..3.0), rng.gen_range(-8.0..8.0));
        if kernel::contains_g_r(&p, t) {
            pts.push((t, b.w_eval(t).unwrap()));
        }
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (a, b) = (pts[i], pts[j]);
            assert!((a.1 - b.1).norm() > 1e-12 * (a.0 - b.0).norm(), "{} {}", a.0, b.0);
        }
    }
}

#[test]
fn halving_the_step_is_within_noise() {
    let p = ModelParams::orthogonal([[1.0, 0.3], [0.3, 1.0]], [-1.0, -0.7]).unwrap();
    let base = SimConfig { horizon: 2000.0, burn_in: 20.0, batches: 20, step: 2e-3, seed: 3, ..SimConfig::default() };
    let fine = SimConfig { step: 1e-3, ..base.clone() };
    let a = oracle::simulate(&p, &base).unwrap();
    let b = oracle::simulate(&p, &fine).unwrap();
    // independent runs: compare the difference to the combined standard error
    for (x, y) in a.laplace_estimates.iter().zip(&b.laplace_estimates) {
        let se = (x.estimate.stderr.powi(2) + y.estimate.stderr.powi(2)).sqrt();
        assert!((x.estimate.mean - y.estimate.mean).abs() < 4.0 * se, "{:?}", x.theta);
    }
}

#[test]
fn boundary_histogram_matches_closed_form_mass() {
    let p = ModelParams::orthogonal(IDENTITY, [-1.0, -1.0]).unwrap();
    let cfg = SimConfig { horizon: 2000.0, burn_in: 20.0, batches: 20, seed: 9, hist_max: 6.0, hist_bins: 30, ..SimConfig::default() };
    let r = oracle::simulate(&p, &cfg).unwrap();
    let f = oracle::DiagonalClosedForms::new(&p).unwrap();
    let h = &r.boundary_histograms[0];
    let mass: f64 = h.density.iter().map(|d| d * h.width).sum();
    assert!((mass - 1.0).abs() < 0.1, "{mass}");
    // first bin average of 2e^{-2x}
    let (lo, hi) = h.edges(0);
    let exact = (f.nu1(lo) - f.nu1(hi)) / 2.0 / h.width;
    assert!((h.density[0] - exact).abs() < 0.15 * exact, "{} vs {exact}", h.density[0]);
    let m = &r.marginal_histograms[1];
    let (lo, hi) = m.edges(2);
    let exact = ((-2.0 * lo).exp() - (-2.0 * hi).exp()) / m.width;
    assert!((m.density[2] - exact).abs() < 0.1 * exact);
}

#[test]
fn projection_scheme_is_available() {
    let p = ModelParams::orthogonal(IDENTITY, [-1.0, -1.0]).unwrap();
    let cfg = SimConfig {
        scheme: oracle::Scheme::Projection,
        horizon: 500.0,
        burn_in: 10.0,
        batches: 10,
        ..SimConfig::default()
    };
    let r = oracle::simulate(&p, &cfg).unwrap();
    let e = r.laplace_at([-0.5, -0.5]).unwrap();
    assert!((e.mean - 0.64).abs() < 0.05);
}
