use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

/// The deterministic part of a run. Identical config and seed give
/// byte-identical serializations.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_config: Option<Value>,
    pub metrics: Value,
    pub recovery: Option<Value>,
}

impl Report {
    pub fn new(command: &'static str, config: &ExperimentConfig) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed(),
            config: config.clone(),
            recovery_config: None,
            metrics: Value::Null,
            recovery: None,
        }
    }
}

/// Wall-clock per stage, kept apart from the report.
#[derive(Debug, Default, Serialize)]
pub struct Envelope {
    pub timings: BTreeMap<String, f64>,
}

impl Envelope {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.insert(stage.to_string(), t.elapsed().as_secs_f64());
        out
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Metrics as CSV: an array of flat objects becomes one row per object,
/// anything else a two-column metric/value table of its scalar leaves.
pub fn write_csv(path: &Path, metrics: &Value) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    match metrics.get("rows").and_then(Value::as_array) {
        Some(rows) if !rows.is_empty() => {
            let header: Vec<String> = rows[0].as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
            w.write_record(&header).map_err(io)?;
            for row in rows {
                let rec: Vec<String> = header.iter().map(|k| scalar(row.get(k).unwrap_or(&Value::Null))).collect();
                w.write_record(&rec).map_err(io)?;
            }
        }
        _ => {
            w.write_record(["metric", "value"]).map_err(io)?;
            let mut leaves = Vec::new();
            flatten("", metrics, &mut leaves);
            for (k, v) in leaves {
                w.write_record([k, v]).map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(_) => {}
        other => out.push((prefix.to_string(), scalar(other))),
    }
}
