//! Monte Carlo estimates of stationary quantities of the reflected process.
//!
//! With orthogonal reflections the Skorokhod map acts coordinatewise, so each
//! coordinate can be advanced exactly given its free increment and the minimum
//! of the Brownian bridge over the step. The plain projection scheme is kept
//! for comparison; it is biased by `O(√h)` near the boundary.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelParams;

/// Environment variable capping the number of simulation threads.
pub const THREADS_ENV: &str = "RBMQ_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation needs orthogonal reflections (R = I)")]
    NonIdentityReflection,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact per coordinate: reflect using the sampled bridge minimum.
    #[default]
    BridgeMinimum,
    /// Euler step followed by componentwise projection onto the quadrant.
    Projection,
}

fn default_grid() -> Vec<[f64; 2]> {
    let r = [-1.0, -0.5, -0.1];
    r.iter().flat_map(|&a| r.iter().map(move |&b| [a, b])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub step: f64,
    pub horizon: f64,
    pub burn_in: f64,
    pub seed: u64,
    pub batches: usize,
    /// Independent chains, run in parallel; batches are pooled.
    pub chains: usize,
    pub scheme: Scheme,
    pub theta_grid: Vec<[f64; 2]>,
    pub hist_bins: usize,
    pub hist_max: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            horizon: 1e4,
            burn_in: 1e2,
            seed: 0,
            batches: 50,
            chains: 1,
            scheme: Scheme::BridgeMinimum,
            theta_grid: default_grid(),
            hist_bins: 50,
            hist_max: 5.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad("step must be positive");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if !(self.burn_in.is_finite() && self.burn_in >= 0.0 && self.burn_in < self.horizon) {
            return bad("burn_in must lie in [0, horizon)");
        }
        if self.batches < 2 {
            return bad("at least two batches are needed for standard errors");
        }
        if self.chains == 0 {
            return bad("chains must be positive");
        }
        if self.hist_bins == 0 || !(self.hist_max > 0.0) {
            return bad("histogram needs bins and a positive range");
        }
        let steps = (self.horizon - self.burn_in) / self.step;
        if steps < self.batches as f64 {
            return bad("fewer steps than batches");
        }
        if self.theta_grid.iter().flatten().any(|t| !t.is_finite()) {
            return bad("theta grid must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_batches(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, stderr: (var / n).sqrt() }
    }

    /// `|mean - target| ≤ k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceEstimate {
    pub theta: [f64; 2],
    pub estimate: Estimate,
}

/// Density histogram on `[0, max)` with equal bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub width: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn edges(&self, i: usize) -> (f64, f64) {
        (i as f64 * self.width, (i + 1) as f64 * self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub laplace_estimates: Vec<LaplaceEstimate>,
    pub local_time_rates: [Estimate; 2],
    /// Binned stationary marginal densities of `Z1`, `Z2`.
    pub marginal_histograms: [Histogram; 2],
    /// Binned `ν1` (local time of `Z1` by position of `Z2`) and `ν2`.
    pub boundary_histograms: [Histogram; 2],
    pub steps_per_chain: u64,
}

impl SimResult {
    pub fn laplace_at(&self, theta: [f64; 2]) -> Option<Estimate> {
        self.laplace_estimates.iter().find(|e| e.theta == theta).map(|e| e.estimate)
    }

    /// Long-format CSV: `section,a,b,value,stderr`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["section", "a", "b", "value", "stderr"])?;
        for e in &self.laplace_estimates {
            out.write_record([
                "laplace".to_string(),
                e.theta[0].to_string(),
                e.theta[1].to_string(),
                e.estimate.mean.to_string(),
                e.estimate.stderr.to_string(),
            ])?;
        }
        for (i, e) in self.local_time_rates.iter().enumerate() {
            out.write_record([
                "local_time_rate".to_string(),
                (i + 1).to_string(),
                String::new(),
                e.mean.to_string(),
                e.stderr.to_string(),
            ])?;
        }
        let hists = [
            ("marginal_z1", &self.marginal_histograms[0]),
            ("marginal_z2", &self.marginal_histograms[1]),
            ("boundary_nu1", &self.boundary_histograms[0]),
            ("boundary_nu2", &self.boundary_histograms[1]),
        ];
        for (name, h) in hists {
            for (i, d) in h.density.iter().enumerate() {
                let (lo, hi) = h.edges(i);
                out.write_record([name.to_string(), lo.to_string(), hi.to_string(), d.to_string(), String::new()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Lower Cholesky factor of a positive definite 2×2 matrix.
fn cholesky(s: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let l11 = s[0][0].sqrt();
    let l21 = s[1][0] / l11;
    let l22 = (s[1][1] - l21 * l21).sqrt();
    [[l11, 0.0], [l21, l22]]
}

/// Per-batch accumulators.
struct BatchStats {
    laplace: Vec<f64>,
    local: [f64; 2],
}

struct Chain<'a> {
    params: &'a ModelParams,
    cfg: &'a SimConfig,
    chol: [[f64; 2]; 2],
    z: [f64; 2],
    marginal: [Vec<f64>; 2],
    boundary: [Vec<f64>; 2],
}

impl<'a> Chain<'a> {
    fn new(params: &'a ModelParams, cfg: &'a SimConfig) -> Self {
        let bins = cfg.hist_bins;
        Self {
            params,
            cfg,
            chol: cholesky(params.sigma()),
            z: [0.0, 0.0],
            marginal: [vec![0.0; bins], vec![0.0; bins]],
            boundary: [vec![0.0; bins], vec![0.0; bins]],
        }
    }

    /// One step; returns the local-time increments.
    #[inline]
    fn step(&mut self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let h = self.cfg.step;
        let sh = h.sqrt();
        let [m1, m2] = self.params.mu();
        let xi1: f64 = rng.sample(StandardNormal);
        let xi2: f64 = rng.sample(StandardNormal);
        let c = &self.chol;
        let y = [m1 * h + sh * c[0][0] * xi1, m2 * h + sh * (c[1][0] * xi1 + c[1][1] * xi2)];
        let var = [self.params.s11() * h, self.params.s22() * h];
        let mut dl = [0.0; 2];
        for i in 0..2 {
            match self.cfg.scheme {
                Scheme::BridgeMinimum => {
                    // minimum of a bridge from 0 to y with variance var[i]
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let m = 0.5 * (y[i] - (y[i] * y[i] - 2.0 * var[i] * u.ln()).sqrt());
                    dl[i] = (-(self.z[i] + m)).max(0.0);
                    self.z[i] = (self.z[i] + y[i] + dl[i]).max(0.0);
                }
                Scheme::Projection => {
                    let next = self.z[i] + y[i];
                    dl[i] = (-next).max(0.0);
                    self.z[i] = next.max(0.0);
                }
            }
        }
        dl
    }

    fn run_batch(&mut self, rng: &mut ChaCha8Rng, steps: u64, record: bool) -> BatchStats {
        let grid = &self.cfg.theta_grid;
        let mut laplace = vec![0.0; grid.len()];
        let mut local = [0.0; 2];
        let bins = self.cfg.hist_bins;
        let width = self.cfg.hist_max / bins as f64;
        for _ in 0..steps {
            let dl = self.step(rng);
            if !record {
                continue;
            }
            let z = self.z;
            for (acc, th) in laplace.iter_mut().zip(grid) {
                *acc += (th[0] * z[0] + th[1] * z[1]).exp();
            }
            local[0] += dl[0];
            local[1] += dl[1];
            for i in 0..2 {
                let b = (z[i] / width) as usize;
                if b < bins {
                    self.marginal[i][b] += 1.0;
                }
                // ν1 is carried by the face {z1 = 0}, indexed by z2
                let other = (z[1 - i] / width) as usize;
                if dl[i] > 0.0 && other < bins {
                    self.boundary[i][other] += dl[i];
                }
            }
        }
        let n = steps as f64;
        let time = n * self.cfg.step;
        BatchStats {
            laplace: laplace.into_iter().map(|s| s / n).collect(),
            local: [local[0] / time, local[1] / time],
        }
    }
}

fn batch_rng(seed: u64, chain: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((chain as u64) << 32) | stream);
    rng
}

struct ChainOutput {
    batches: Vec<BatchStats>,
    marginal: [Vec<f64>; 2],
    boundary: [Vec<f64>; 2],
}

fn run_chain(params: &ModelParams, cfg: &SimConfig, chain: usize) -> ChainOutput {
    let mut c = Chain::new(params, cfg);
    let burn = (cfg.burn_in / cfg.step).round() as u64;
    let total = ((cfg.horizon - cfg.burn_in) / cfg.step).round() as u64;
    let per_batch = total / cfg.batches as u64;
    c.run_batch(&mut batch_rng(cfg.seed, chain, 0), burn, false);
    let batches = (0..cfg.batches)
        .map(|b| c.run_batch(&mut batch_rng(cfg.seed, chain, b as u64 + 1), per_batch, true))
        .collect();
    ChainOutput { batches, marginal: c.marginal, boundary: c.boundary }
}

/// Number of worker threads, honouring [`THREADS_ENV`].
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.parse::<usize>().ok().filter(|n| *n > 0)
}

pub fn simulate(params: &ModelParams, cfg: &SimConfig) -> Result<SimResult, SimError> {
    if !params.has_identity_reflection() {
        return Err(SimError::NonIdentityReflection);
    }
    cfg.validate()?;
    let speed = params.mu1().abs().max(params.mu2().abs());
    if cfg.step * speed > 0.05 || cfg.step * params.s11().max(params.s22()) > 0.05 {
        log::warn!("step {} is large relative to the drift and diffusion scales", cfg.step);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| SimError::ThreadPool(e.to_string()))?;
    let outputs: Vec<ChainOutput> =
        pool.install(|| (0..cfg.chains).into_par_iter().map(|k| run_chain(params, cfg, k)).collect());

    let batches: Vec<&BatchStats> = outputs.iter().flat_map(|o| o.batches.iter()).collect();
    let laplace_estimates = cfg
        .theta_grid
        .iter()
        .enumerate()
        .map(|(j, th)| {
            let values: Vec<f64> = batches.iter().map(|b| b.laplace[j]).collect();
            LaplaceEstimate { theta: *th, estimate: Estimate::from_batches(&values) }
        })
        .collect();
    let local = |i: usize| Estimate::from_batches(&batches.iter().map(|b| b.local[i]).collect::<Vec<_>>());
    let local_time_rates = [local(0), local(1)];

    let per_batch = ((cfg.horizon - cfg.burn_in) / cfg.step).round() as u64 / cfg.batches as u64;
    let steps = per_batch * cfg.batches as u64;
    let width = cfg.hist_max / cfg.hist_bins as f64;
    let samples = (steps * cfg.chains as u64) as f64;
    let time = samples * cfg.step;
    let merge = |pick: &dyn Fn(&ChainOutput) -> &Vec<f64>, norm: f64| Histogram {
        width,
        density: (0..cfg.hist_bins)
            .map(|b| outputs.iter().map(|o| pick(o)[b]).sum::<f64>() / (norm * width))
            .collect(),
    };
    let marginal_histograms = [merge(&|o| &o.marginal[0], samples), merge(&|o| &o.marginal[1], samples)];
    let boundary_histograms = [merge(&|o| &o.boundary[0], time), merge(&|o| &o.boundary[1], time)];

    Ok(SimResult {
        laplace_estimates,
        local_time_rates,
        marginal_histograms,
        boundary_histograms,
        steps_per_chain: steps,
    })
}
