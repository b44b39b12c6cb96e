//! Output plumbing: `#`-prefixed metadata, CSV bodies, JSON envelopes.
//! No timestamps anywhere, so identical commands produce identical bytes.

use serde_json::{json, Map, Value};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata lines preceding a CSV body.
pub fn csv_metadata(config: &RunConfig) -> String {
    format!(
        "# fixset {VERSION}\n# config seed={} workers={} format={} limit_dp_extended={}\n",
        config.seed,
        config.workers,
        config.format_name(),
        config.limit_dp_extended
    )
}

/// JSON envelope shared by every command.
pub fn json_envelope(config: &RunConfig, command: &str, payload: Value) -> String {
    let mut obj = Map::new();
    obj.insert("version".into(), json!(VERSION));
    obj.insert(
        "config".into(),
        serde_json::to_value(config).expect("config serializes"),
    );
    obj.insert("command".into(), json!(command));
    if let Value::Object(fields) = payload {
        for (k, v) in fields {
            obj.insert(k, v);
        }
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(obj)).expect("valid json");
    out.push('\n');
    out
}
