//! Reproducibility record written alongside every output.

use serde::Serialize;
use serde_json::{Map, Value};

/// Bumped whenever an output schema changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    /// Every parameter of the command, including defaults.
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub precision_bits: Option<u32>,
    /// Worst truncation bounds seen, when the command truncates anything.
    pub truncation: Option<Value>,
    /// Excluded from [`RunManifest::key`].
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            params: Map::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            precision_bits: None,
            truncation: None,
            wall_time_seconds: 0.0,
        }
    }

    pub fn param<V: Serialize>(mut self, name: &str, value: V) -> Self {
        self.params.insert(name.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Everything that determines the output bytes; equal keys give equal
    /// outputs regardless of thread count.
    pub fn key(&self) -> String {
        let mut v = serde_json::to_value(self).expect("plain data serializes");
        if let Value::Object(m) = &mut v {
            m.remove("wall_time_seconds");
            m.remove("truncation");
        }
        v.to_string()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}
