//! Machine-readable record of one command invocation.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub version: &'static str,
    pub config_source: Option<String>,
    /// SHA-256 of the canonical configuration.
    pub config_digest: Option<String>,
    pub seeds: Vec<u64>,
    pub rng: Option<&'static str>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: 1,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config_source: None,
            config_digest: None,
            seeds: Vec::new(),
            rng: None,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            exit_code: 0,
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}
