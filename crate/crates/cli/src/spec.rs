//! Experiment specification: what to generate, which algorithm to run, and
//! with which parameters. Serializable so a spec (or a config file) fully
//! determines a run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use truncpivot_core::gen;
use truncpivot_core::graph::{Clustering, SignedGraph};
use truncpivot_core::params::TruncationParams;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Er { n: usize, p: f64 },
    Planted { n: usize, k: usize, q: f64 },
    Complete { n: usize },
    Star { n: usize },
    File { path: PathBuf },
}

impl GeneratorSpec {
    /// Builds the graph for one seed; planted instances also return the
    /// ground-truth clustering.
    pub fn build(&self, seed: u64) -> Result<(SignedGraph, Option<Clustering>), SpecError> {
        match self {
            GeneratorSpec::Er { n, p } => match gen::er(*n, *p, seed) {
                Ok(g) => Ok((g, None)),
                Err(e) => invalid(e.to_string()),
            },
            GeneratorSpec::Planted { n, k, q } => match gen::planted(*n, *k, *q, seed) {
                Ok((g, truth)) => Ok((g, Some(truth))),
                Err(e) => invalid(e.to_string()),
            },
            GeneratorSpec::Complete { n } => Ok((gen::complete(*n), None)),
            GeneratorSpec::Star { n } => Ok((gen::star(*n), None)),
            GeneratorSpec::File { path } => match SignedGraph::read_file(path) {
                Ok(g) => Ok((g, None)),
                Err(e) => invalid(format!("cannot load graph {}: {e}", path.display())),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoKind {
    Pivot,
    TpParallel,
    TpSequential,
    StreamFixed,
    StreamAdaptive,
    Mpc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrderSpec {
    /// Uniform shuffle, one per (seed, trial).
    Random,
    /// The greedy memory adversary matching the algorithm variant.
    Adversary,
    /// Replay a recorded stream file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub generator: GeneratorSpec,
    pub algo: AlgoKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_rank_bits")]
    pub rank_bits_factor: u32,
    #[serde(default = "default_order")]
    pub order: OrderSpec,
    pub seeds: Vec<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_mpc_machines")]
    pub mpc_machines: usize,
    #[serde(default = "default_mpc_words")]
    pub mpc_words: u64,
    #[serde(default = "default_mpc_placement")]
    pub mpc_placement: MpcPlacement,
    #[serde(default = "default_mpc_leader")]
    pub mpc_leader: MpcLeader,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MpcPlacement {
    Contiguous,
    Hashed,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MpcLeader {
    /// One leader machine per trial.
    PerTrial,
    /// All trials on machine 0, the single-leader layout.
    Single,
}

fn default_epsilon() -> f64 {
    truncpivot_core::params::DEFAULT_EPSILON
}
fn default_c() -> f64 {
    truncpivot_core::params::DEFAULT_C
}
fn default_rank_bits() -> u32 {
    3
}
fn default_order() -> OrderSpec {
    OrderSpec::Random
}
fn default_trials() -> usize {
    1
}
fn default_mpc_machines() -> usize {
    4
}
fn default_mpc_words() -> u64 {
    1 << 40
}
fn default_mpc_placement() -> MpcPlacement {
    MpcPlacement::Contiguous
}
fn default_mpc_leader() -> MpcLeader {
    MpcLeader::PerTrial
}

impl ExperimentSpec {
    /// Validates ranges and returns the truncation parameters.
    pub fn validate(&self) -> Result<TruncationParams, SpecError> {
        let params = TruncationParams::new(self.epsilon, self.c)
            .map_err(|e| SpecError::Invalid(e.to_string()))?;
        if self.seeds.is_empty() {
            return invalid("seed list must be non-empty");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.rank_bits_factor == 0 {
            return invalid("rank_bits_factor must be at least 1");
        }
        if self.mpc_machines == 0 {
            return invalid("mpc_machines must be at least 1");
        }
        match &self.generator {
            GeneratorSpec::Er { p, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return invalid(format!("er probability {p} outside [0, 1]"));
                }
            }
            GeneratorSpec::Planted { n, k, q } => {
                if !(0.0..=1.0).contains(q) {
                    return invalid(format!("planted noise {q} outside [0, 1]"));
                }
                if *k == 0 || n % k != 0 {
                    return invalid(format!("planted requires k | n, got n = {n}, k = {k}"));
                }
            }
            _ => {}
        }
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> ExperimentSpec {
        ExperimentSpec {
            generator: GeneratorSpec::Er { n: 20, p: 0.2 },
            algo: AlgoKind::Pivot,
            epsilon: 0.2,
            c: 8.0,
            rank_bits_factor: 3,
            order: OrderSpec::Random,
            seeds: vec![1, 2],
            trials: 2,
            mpc_machines: 2,
            mpc_words: 1 << 20,
            mpc_placement: MpcPlacement::Contiguous,
            mpc_leader: MpcLeader::PerTrial,
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = base_spec();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let mut s = base_spec();
        s.epsilon = 0.25;
        assert!(s.validate().is_err());
        let mut s = base_spec();
        s.seeds.clear();
        assert!(s.validate().is_err());
        let mut s = base_spec();
        s.generator = GeneratorSpec::Planted { n: 10, k: 3, q: 0.1 };
        assert!(s.validate().is_err());
        assert!(base_spec().validate().is_ok());
    }
}
