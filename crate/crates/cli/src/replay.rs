//! Replay files: enough data to reproduce a recorded run exactly and check
//! it still behaves the same, including the full stream order and derived
//! permutation of adaptive runs that surfaced violations.

use serde::{Deserialize, Serialize};

use truncpivot_core::stream::StreamOutcome;

use crate::report::SCHEMA_VERSION;
use crate::runner::{recompute_record, RunError};
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReplayFile {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub trial: usize,
    /// Exact stream order the run consumed (adaptive runs only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stream_order: Option<Vec<(u32, u32)>>,
    /// Whitespace-separated rank list of the derived permutation.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub derived_permutation: Option<String>,
    pub observed_cost: u64,
    #[serde(default)]
    pub observed_violations: Vec<u32>,
}

impl ReplayFile {
    pub fn for_violation(
        spec: &ExperimentSpec,
        seed: u64,
        trial: usize,
        stream_order: Vec<(u32, u32)>,
        outcome: &StreamOutcome,
        cost: u64,
    ) -> Self {
        ReplayFile {
            schema_version: SCHEMA_VERSION,
            spec: spec.clone(),
            seed,
            trial,
            stream_order: Some(stream_order),
            derived_permutation: Some(outcome.permutation.to_rank_string()),
            observed_cost: cost,
            observed_violations: outcome.tails_violations.clone(),
        }
    }

    /// A replay stub for an ordinary report record (no recorded order; the
    /// run is reproduced from the spec and seed alone).
    pub fn for_record(spec: &ExperimentSpec, seed: u64, trial: usize, cost: u64) -> Self {
        ReplayFile {
            schema_version: SCHEMA_VERSION,
            spec: spec.clone(),
            seed,
            trial,
            stream_order: None,
            derived_permutation: None,
            observed_cost: cost,
            observed_violations: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("replay serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug)]
pub struct ReplayVerdict {
    pub reproduced: bool,
    pub recomputed_cost: u64,
    pub detail: String,
}

/// Re-executes the recorded run and compares costs (and violation counts,
/// when recorded).
pub fn verify(replay: &ReplayFile) -> Result<ReplayVerdict, RunError> {
    let record = recompute_record(
        &replay.spec,
        replay.seed,
        replay.trial,
        replay.stream_order.as_deref(),
    )?;
    let mut mismatches = Vec::new();
    if record.cost != replay.observed_cost {
        mismatches.push(format!(
            "cost {} != recorded {}",
            record.cost, replay.observed_cost
        ));
    }
    if record.violations as usize != replay.observed_violations.len() {
        mismatches.push(format!(
            "violations {} != recorded {}",
            record.violations,
            replay.observed_violations.len()
        ));
    }
    Ok(ReplayVerdict {
        reproduced: mismatches.is_empty(),
        recomputed_cost: record.cost,
        detail: if mismatches.is_empty() {
            format!(
                "seed {} trial {} reproduced: cost {}",
                replay.seed, replay.trial, record.cost
            )
        } else {
            mismatches.join("; ")
        },
    })
}
