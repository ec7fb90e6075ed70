//! Machine-checkable verification results with a stable JSON schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

/// Outcome of one check.
///
/// A `FAIL` always carries a `counterexample` holding the concrete input
/// that broke the identity. `ledger_constants` records every scalar
/// normalization the check had to make (sign and scale of forms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub samples: u64,
    pub witness: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    pub ledger_constants: BTreeMap<String, String>,
}

impl Certificate {
    pub fn pass(check: impl Into<String>) -> Self {
        Certificate {
            schema: SCHEMA_VERSION,
            check: check.into(),
            status: Status::Pass,
            field: None,
            seed: None,
            samples: 0,
            witness: BTreeMap::new(),
            counterexample: None,
            ledger_constants: BTreeMap::new(),
        }
    }

    pub fn fail(check: impl Into<String>, counterexample: Value) -> Self {
        let mut c = Self::pass(check);
        c.status = Status::Fail;
        c.counterexample = Some(counterexample);
        c
    }

    /// Turns a passing certificate into a failing one, keeping its witness.
    pub fn into_failure(mut self, counterexample: Value) -> Self {
        self.status = Status::Fail;
        self.counterexample = Some(counterexample);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_field(mut self, field: impl ToString) -> Self {
        self.field = Some(field.to_string());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn witness(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.witness.insert(key.to_string(), value.into());
        self
    }

    pub fn ledger(mut self, key: &str, value: impl ToString) -> Self {
        self.ledger_constants.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serializes")
    }
}

/// Top-level summary of a batch of checks, in a canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub all_pass: bool,
    pub summary: Vec<ManifestEntry>,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub check: String,
    pub status: Status,
}

impl Manifest {
    pub fn new(certificates: Vec<Certificate>) -> Self {
        let summary = certificates
            .iter()
            .map(|c| ManifestEntry { check: c.check.clone(), status: c.status })
            .collect();
        Manifest {
            schema: SCHEMA_VERSION,
            all_pass: certificates.iter().all(Certificate::passed),
            summary,
            certificates,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn failure_keeps_counterexample() {
        let c = Certificate::fail("demo", json!({"x": [1, 2]})).with_seed(3);
        assert!(!c.passed());
        let v = c.to_json();
        assert_eq!(v["status"], "FAIL");
        assert_eq!(v["counterexample"]["x"][1], 2);
        assert_eq!(v["schema"], 1);
    }

    #[test]
    fn manifest_summarizes_in_order() {
        let m = Manifest::new(vec![Certificate::pass("a"), Certificate::fail("b", json!({"x": [0]}))]);
        assert!(!m.all_pass);
        assert_eq!(m.summary[1].check, "b");
        let text = m.to_json_string();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
