use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

/// Effective settings of a run, embedded verbatim in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tau: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    /// Command-specific parameters.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

impl RunConfig {
    pub fn new(command: &str, tolerance: f64) -> Self {
        Self {
            command: command.to_string(),
            tolerance,
            order: None,
            seed: None,
            samples: None,
            tau: Vec::new(),
            t0: None,
            t1: None,
            extra: Value::Null,
        }
    }
}

/// Result of one command: JSON payload, CSV rendering, verdict.
pub struct Outcome {
    pub result: Value,
    pub csv: String,
    pub passed: bool,
}

pub fn render_json(config: &RunConfig, outcome: &Outcome) -> String {
    let doc = json!({
        "version": halphen::VERSION,
        "config": config,
        "tolerance": config.tolerance,
        "passed": outcome.passed,
        "result": outcome.result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn c(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// `name,value,tolerance,passed` rows.
pub struct CheckTable {
    rows: Vec<(String, f64, f64, bool)>,
}

impl CheckTable {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    /// Records `value <= tol` and returns the verdict.
    pub fn push(&mut self, name: impl Into<String>, value: f64, tol: f64) -> bool {
        let ok = value <= tol;
        self.rows.push((name.into(), value, tol, ok));
        ok
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.3)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|(n, v, t, ok)| json!({"name": n, "value": v, "tolerance": t, "passed": ok}))
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,tolerance,passed\n");
        for (n, v, t, ok) in &self.rows {
            let _ = writeln!(out, "{n},{v:e},{t:e},{ok}");
        }
        out
    }
}
