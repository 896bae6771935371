//! The shared JSON report schema (versioned; `"schema": 1`).

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    /// Only for windowed searches over infinite groups.
    #[serde(rename = "bounded-inconclusive")]
    BoundedInconclusive,
    #[serde(rename = "usage-error")]
    UsageError,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::BoundedInconclusive => "bounded-inconclusive",
            Status::UsageError => "usage-error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::BoundedInconclusive => 2,
            Status::UsageError => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub name: String,
    pub command: String,
    pub status: Status,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub budget: u64,
    pub records: Vec<Value>,
    pub witnesses: Vec<Value>,
    /// Wall-clock duration; excluded from determinism comparisons.
    pub timing_ms: u128,
    /// Set when the scenario declared an expected status and it matched.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_status: Option<String>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}
