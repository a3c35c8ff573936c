//! The JSON summary written for every run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::spec::{ExperimentKind, ExperimentSpec, OutputSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub tool: String,
    pub version: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    /// The spec that produced the report.
    pub spec: ExperimentSpec,
    pub paths: u64,
    pub flagged: u64,
    pub results: serde_json::Value,
    pub runtime_seconds: f64,
    /// SHA-256 of everything above except the runtime and the output locations.
    pub content_hash: String,
}

#[derive(Serialize)]
struct Hashed<'a> {
    tool: &'a str,
    version: &'a str,
    kind: ExperimentKind,
    seed: u64,
    spec: &'a ExperimentSpec,
    paths: u64,
    flagged: u64,
    results: &'a serde_json::Value,
}

impl SummaryReport {
    pub fn new(
        spec: &ExperimentSpec,
        paths: u64,
        flagged: u64,
        results: serde_json::Value,
        runtime_seconds: f64,
    ) -> Self {
        let mut report = Self {
            tool: "mbm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kind: spec.kind,
            seed: spec.seed,
            spec: spec.clone(),
            paths,
            flagged,
            results,
            runtime_seconds,
            content_hash: String::new(),
        };
        report.content_hash = report.compute_hash();
        report
    }

    pub fn compute_hash(&self) -> String {
        let spec = ExperimentSpec {
            output: OutputSpec::default(),
            ..self.spec.clone()
        };
        let bytes = serde_json::to_vec(&Hashed {
            tool: &self.tool,
            version: &self.version,
            kind: self.kind,
            seed: self.seed,
            spec: &spec,
            paths: self.paths,
            flagged: self.flagged,
            results: &self.results,
        })
        .expect("reports always serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn flagged_fraction(&self) -> f64 {
        if self.paths == 0 {
            0.0
        } else {
            self.flagged as f64 / self.paths as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
