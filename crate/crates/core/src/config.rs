//! JSON model configuration.
//!
//! ```json
//! {"sigma": [[1, 0], [0, 1]], "mu": [-1, -1], "r": [[1, 0], [0, 1]]}
//! ```
//!
//! `r` defaults to the identity. An optional `simulation` object overrides
//! the default [`SimConfig`]. Unknown fields are ignored, so the output of
//! `rbmq analyze` can be fed back as a config.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_parameters, ModelError, ModelParams, IDENTITY};
use crate::oracle::SimConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub sigma: [[f64; 2]; 2],
    pub mu: [f64; 2],
    #[serde(default = "identity")]
    pub r: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimConfig>,
}

fn identity() -> [[f64; 2]; 2] {
    IDENTITY
}

impl ModelConfig {
    pub fn from_params(p: &ModelParams) -> Self {
        Self { sigma: p.sigma(), mu: p.mu(), r: p.r(), simulation: None }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        Ok(validate_parameters(self.sigma, self.mu, self.r)?)
    }

    pub fn simulation(&self) -> SimConfig {
        self.simulation.clone().unwrap_or_default()
    }
}
