//! Generation backends: a remote chat-completion client with
//! JSON-constrained output, and an offline mixture simulator.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::TableError;

mod prompt;
mod remote;
mod simulator;

pub use prompt::{build_dummy_prompt, build_prompt, response_schema, PromptBundle};
pub use remote::remote_generate;
pub use simulator::{simulate_generate, simulate_generate_traced, ColumnPrior, MixtureConfig};

/// Environment variable holding the API key for the remote backend.
pub const API_KEY_VAR: &str = "TABGEN_API_KEY";

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("environment variable {API_KEY_VAR} is not set")]
    MissingApiKey,
    #[error("authentication rejected (HTTP {0})")]
    AuthFailed(u16),
    #[error("request failed (HTTP {status}): {body}")]
    HttpStatus { status: u16, body: String },
    #[error("retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("malformed completion response: {0}")]
    BadResponse(String),
    #[error("invalid mixture config: {0}")]
    BadMixture(String),
    #[error("in-context table is empty but lambda < 1")]
    EmptyInContext,
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Remote,
    Simulator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    #[serde(default = "default_endpoint")]
    pub endpoint_url: String,
    #[serde(default = "default_model")]
    pub model_name: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_endpoint() -> String {
    "https://api.openai.com/v1".into()
}
fn default_model() -> String {
    "gpt-4o-mini".into()
}
fn default_temperature() -> f64 {
    1.0
}
fn default_max_retries() -> u32 {
    3
}
fn default_timeout_secs() -> u64 {
    120
}

impl BackendConfig {
    pub fn simulator() -> Self {
        BackendConfig {
            kind: BackendKind::Simulator,
            endpoint_url: default_endpoint(),
            model_name: "simulator".into(),
            temperature: default_temperature(),
            max_retries: default_max_retries(),
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(GeneratorError::BadMixture(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}
