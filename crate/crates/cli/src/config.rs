use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Version tag of every JSON document the tool writes.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Everything that determines an output, hashed into `configHash`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub schema_version: &'static str,
    pub n: u32,
    pub ball_budget: usize,
    pub breakpoint_cap: usize,
    pub grid_size: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub format: Format,
    pub command: String,
    pub args: serde_json::Value,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::Validation(format!("base n must be at least 2, got {}", self.n)));
        }
        if self.ball_budget == 0 || self.breakpoint_cap == 0 || self.grid_size == 0 {
            return Err(CliError::Validation("budgets must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(CliError::Validation("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
