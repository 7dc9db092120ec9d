//! Versioned JSON report envelope.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::failure::Failure;
use crate::Global;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    #[serde(flatten)]
    pub body: Map<String, Value>,
    /// Already written by the subcommand.
    #[serde(skip)]
    pub emitted: bool,
}

impl Report {
    pub fn new(command: &'static str, global: &Global) -> Self {
        let generated_at_unix = (!global.no_timestamp).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            generated_at_unix,
            body: Map::new(),
            emitted: false,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.body.insert(key.to_string(), v);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, global: &Global) -> Result<(), Failure> {
        if self.emitted {
            return Ok(());
        }
        match &global.json {
            Some(path) => std::fs::write(path, self.to_json()).map_err(|e| Failure::io(e, path)),
            None => {
                print!("{}", self.to_json());
                Ok(())
            }
        }
    }
}
