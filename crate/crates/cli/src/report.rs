//! Experiment reports: per-run records, aggregates, JSON (canonical,
//! wall-time free) and the flattened CSV projection.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::spec::ExperimentSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub trial: usize,
    pub cost: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_kind: Option<BoundKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peak_slots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gstore_edges: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounds: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peak_machine_words: Option<u64>,
    /// Tails-containment violations observed in an adaptive run.
    #[serde(default)]
    pub violations: u32,
    /// Machine-dependent; reported in the CSV and the console summary but
    /// kept out of the canonical JSON so replays are byte-identical.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    BruteForce,
    TrianglePacking,
    PlantedTruth,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::BruteForce => "brute-force",
            BoundKind::TrianglePacking => "triangle-packing",
            BoundKind::PlantedTruth => "planted-truth",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Aggregates {
    pub runs: usize,
    pub mean_cost: f64,
    pub stderr_cost: f64,
    pub max_cost: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_peak_slots: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_gstore_edges: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub records: Vec<RunRecord>,
    pub aggregates: Aggregates,
}

impl ExperimentReport {
    pub fn new(spec: ExperimentSpec, records: Vec<RunRecord>) -> Self {
        let aggregates = aggregate(&records);
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            spec,
            records,
            aggregates,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Flattened projection for spreadsheets; one row per record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,trial,cost,lower_bound,bound_kind,ratio,peak_slots,gstore_edges,rounds,peak_machine_words,violations,wall_ms\n",
        );
        for r in &self.records {
            let opt_u64 = |v: &Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.trial,
                r.cost,
                opt_u64(&r.lower_bound),
                r.bound_kind.map(|b| b.as_str()).unwrap_or_default(),
                r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
                opt_u64(&r.peak_slots),
                opt_u64(&r.gstore_edges),
                r.rounds.map(|x| x.to_string()).unwrap_or_default(),
                opt_u64(&r.peak_machine_words),
                r.violations,
                if r.wall_ms > 0.0 {
                    format!("{:.3}", r.wall_ms)
                } else {
                    String::new()
                },
            );
        }
        out
    }

    /// Console summary.
    pub fn summary(&self) -> String {
        let a = &self.aggregates;
        let mut s = format!(
            "{} runs: mean cost {:.3} (stderr {:.3}), max {}",
            a.runs, a.mean_cost, a.stderr_cost, a.max_cost
        );
        if let Some(r) = a.mean_ratio {
            let _ = write!(s, ", mean ratio {r:.3}");
        }
        if let Some(p) = a.mean_peak_slots {
            let _ = write!(s, ", mean peak slots {p:.1}");
        }
        if let Some(g) = a.mean_gstore_edges {
            let _ = write!(s, ", mean G_store edges {g:.1}");
        }
        let total_wall: f64 = self.records.iter().map(|r| r.wall_ms).sum();
        if total_wall > 0.0 {
            let _ = write!(s, ", total wall {total_wall:.0} ms");
        }
        s
    }
}

fn aggregate(records: &[RunRecord]) -> Aggregates {
    let n = records.len();
    let costs: Vec<f64> = records.iter().map(|r| r.cost as f64).collect();
    let mean_cost = if n == 0 {
        0.0
    } else {
        costs.iter().sum::<f64>() / n as f64
    };
    let stderr_cost = if n < 2 {
        0.0
    } else {
        let var = costs
            .iter()
            .map(|x| (x - mean_cost) * (x - mean_cost))
            .sum::<f64>()
            / (n as f64 - 1.0);
        (var / n as f64).sqrt()
    };
    let mean_opt = |get: fn(&RunRecord) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = records.iter().filter_map(get).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    Aggregates {
        runs: n,
        mean_cost,
        stderr_cost,
        max_cost: records.iter().map(|r| r.cost).max().unwrap_or(0),
        mean_ratio: mean_opt(|r| r.ratio),
        mean_peak_slots: mean_opt(|r| r.peak_slots.map(|x| x as f64)),
        mean_gstore_edges: mean_opt(|r| r.gstore_edges.map(|x| x as f64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{AlgoKind, GeneratorSpec, MpcLeader, MpcPlacement, OrderSpec};

    fn record(seed: u64, cost: u64) -> RunRecord {
        RunRecord {
            seed,
            trial: 0,
            cost,
            lower_bound: Some(cost / 2),
            bound_kind: Some(BoundKind::BruteForce),
            ratio: Some(2.0),
            peak_slots: None,
            gstore_edges: None,
            rounds: None,
            peak_machine_words: None,
            violations: 0,
            wall_ms: 1.25,
        }
    }

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            generator: GeneratorSpec::Er { n: 8, p: 0.5 },
            algo: AlgoKind::Pivot,
            epsilon: 0.2,
            c: 8.0,
            rank_bits_factor: 3,
            order: OrderSpec::Random,
            seeds: vec![1],
            trials: 1,
            mpc_machines: 1,
            mpc_words: 1 << 20,
            mpc_placement: MpcPlacement::Contiguous,
            mpc_leader: MpcLeader::PerTrial,
        }
    }

    #[test]
    fn json_omits_wall_time() {
        let report = ExperimentReport::new(spec(), vec![record(1, 4), record(2, 6)]);
        let json = report.to_json();
        assert!(!json.contains("wall_ms"));
        let back = ExperimentReport::from_json(&json).unwrap();
        assert_eq!(back.records[0].wall_ms, 0.0);
        assert_eq!(back.aggregates, report.aggregates);
    }

    #[test]
    fn csv_carries_wall_time() {
        let report = ExperimentReport::new(spec(), vec![record(1, 4)]);
        let csv = report.to_csv();
        assert!(csv.starts_with("seed,trial,cost"));
        assert!(csv.contains("1.250"));
        assert!(csv.contains("brute-force"));
    }

    #[test]
    fn aggregates_are_simple_stats() {
        let report = ExperimentReport::new(spec(), vec![record(1, 4), record(2, 6)]);
        assert_eq!(report.aggregates.runs, 2);
        assert!((report.aggregates.mean_cost - 5.0).abs() < 1e-12);
        assert_eq!(report.aggregates.max_cost, 6);
        assert_eq!(report.aggregates.mean_ratio, Some(2.0));
    }
}
