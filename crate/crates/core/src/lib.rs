//! Stationary distribution of reflected Brownian motion in the quadrant.
//!
//! For orthogonal reflections the boundary Laplace transforms are explicit in
//! terms of a generalized Chebyshev polynomial composed with an affine map.
//! This crate evaluates them, classifies their tail asymptotics, provides the
//! rational uniformization of the kernel, and ships two independent oracles
//! (simulation and numerical inversion) to check the results.
//!
//! ```
//! use num_complex::Complex64;
//! use rbmq_core::{ModelParams, TransformBundle};
//!
//! let p = ModelParams::orthogonal([[1.0, 0.0], [0.0, 1.0]], [-1.0, -1.0]).unwrap();
//! let b = TransformBundle::new(&p).unwrap();
//! let v = b.phi1_eval(Complex64::new(-1.0, 0.0)).unwrap();
//! assert!((v.re - 2.0 / 3.0).abs() < 1e-15);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod chebyshev;
pub mod checks;
pub mod config;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod transform;
pub mod uniformization;

pub use asymptotics::{AsymptoticReport, AsymptoticsError, BranchConstants, Regime};
pub use chebyshev::{ChebyshevError, ChebyshevOrder, Nature};
pub use checks::CheckOutcome;
pub use config::{ConfigError, ModelConfig};
pub use kernel::{Branch, HyperbolaR, KernelError, KernelPoint};
pub use model::{validate_parameters, DerivedScalars, ModelError, ModelParams, Violation, IDENTITY};
pub use num_complex::Complex64;
pub use oracle::{DensityTable, InversionError, SimConfig, SimError, SimResult};
pub use transform::{TransformBundle, TransformError};
pub use uniformization::{GroupReport, Uniformization, UniformizationError};

use thiserror::Error;

/// Any failure of the library, for callers that do not need to distinguish.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Chebyshev(#[from] ChebyshevError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error(transparent)]
    Uniformization(#[from] UniformizationError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

impl Error {
    /// True for invalid input, as opposed to a refusal to compute at a point.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Model(_))
    }
}
