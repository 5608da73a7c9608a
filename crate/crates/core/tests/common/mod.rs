#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbmq_core::ModelParams;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random ergodic model with orthogonal reflections and correlation in (-0.9, 0.9).
pub fn random_model(rng: &mut ChaCha8Rng) -> ModelParams {
    let s11: f64 = rng.gen_range(0.3..3.0);
    let s22 = rng.gen_range(0.3..3.0);
    let rho: f64 = rng.gen_range(-0.9..0.9);
    let s12 = rho * (s11 * s22).sqrt();
    let mu = [-rng.gen_range(0.05..3.0), -rng.gen_range(0.05..3.0)];
    ModelParams::orthogonal([[s11, s12], [s12, s22]], mu).expect("ergodic by construction")
}

pub fn random_diagonal(rng: &mut ChaCha8Rng) -> ModelParams {
    let s = [rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0)];
    let mu = [-rng.gen_range(0.05..3.0), -rng.gen_range(0.05..3.0)];
    ModelParams::orthogonal([[s[0], 0.0], [0.0, s[1]]], mu).expect("ergodic by construction")
}
