//! Run manifests: the resolved configuration plus summaries and embedded
//! invariant-check results, enough to reproduce a dataset exactly.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// A check that is required to fail (and did) is recorded with
    /// `passed = true` and this flag set.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expected_fail: bool,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail, expected_fail: false }
    }

    pub fn expected_fail(name: &str, failed_as_expected: bool, detail: String) -> Self {
        Self { name: name.into(), passed: failed_as_expected, detail, expected_fail: true }
    }
}

/// Everything needed to rerun an experiment and audit its health.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub resolved_config: serde_json::Value,
    pub duration_seconds: f64,
    pub summary: serde_json::Value,
    pub checks: Vec<CheckResult>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(experiment: &str, resolved_config: serde_json::Value) -> Self {
        Self {
            tool: "sqem".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: experiment.into(),
            resolved_config,
            duration_seconds: 0.0,
            summary: serde_json::Value::Null,
            checks: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::SqemError::Config(e.to_string()))?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}
