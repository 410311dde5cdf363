//! Run manifests: enough metadata to reproduce a run and check its outputs.
//! With a fixed seed and parameters, outputs are bit-identical and so are
//! the recorded hashes.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    /// SHA-256 of each emitted artifact ("result" = the JSON result object).
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        parameters: serde_json::Value,
        seed: u64,
        result_hash: String,
    ) -> Self {
        let mut outputs = BTreeMap::new();
        outputs.insert("result".to_string(), result_hash);
        Self {
            command: command.to_string(),
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            outputs,
        }
    }
}
