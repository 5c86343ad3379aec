//! Run reports and the exit-code contract.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenario::{Command, Scenario, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    InvalidInput,
    HypothesisViolation,
    /// Inconclusive numerics or incomplete evidence.
    Inconclusive,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InvalidInput => 1,
            Status::HypothesisViolation => 2,
            Status::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionFlag {
    /// `levi-hop`, `sampling-confidence` or `truncation`.
    pub kind: String,
    pub note: String,
}

impl AssumptionFlag {
    pub fn new(kind: &str, note: impl Into<String>) -> Self {
        AssumptionFlag { kind: kind.into(), note: note.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: Command,
    pub status: Status,
    pub exit_code: i32,
    /// Machine-readable reason for any non-`ok` status.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub scenario: Scenario,
    pub results: Value,
    pub assumptions: Vec<AssumptionFlag>,
    /// Files written next to the report.
    pub files: Vec<String>,
    /// Only present with `--timing`, so default reports stay byte-stable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(scenario: Scenario, status: Status) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: "tube-envelope".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: scenario.command,
            status,
            exit_code: status.exit_code(),
            reason: None,
            scenario,
            results: Value::Null,
            assumptions: Vec::new(),
            files: Vec::new(),
            wall_time_seconds: None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }
}

/// Error line for input that never became a scenario.
pub fn invalid_input_json(reason: &str) -> String {
    serde_json::json!({
        "status": Status::InvalidInput,
        "exit_code": Status::InvalidInput.exit_code(),
        "reason": reason,
    })
    .to_string()
}
