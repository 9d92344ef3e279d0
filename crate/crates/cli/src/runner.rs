//! Executes an [`ExperimentSpec`]: one graph per seed, `trials` runs per
//! graph, certified lower bounds where available, and replay payloads for
//! any run that surfaced a containment violation.

use std::time::Instant;

use thiserror::Error;

use truncpivot_core::adversary::{greedy_fixed_order, random_order, GreedyAdaptiveAdversary};
use truncpivot_core::graph::{disagreements, Clustering, SignedGraph};
use truncpivot_core::mpc::{mpc_truncated_pivot, measure_gstore, LeaderMode, MpcError, MpcTopology, Placement};
use truncpivot_core::oracle::{brute_force_opt, triangle_packing_lower_bound};
use truncpivot_core::params::TruncationParams;
use truncpivot_core::perm::Permutation;
use truncpivot_core::pivot::{classic_pivot, truncated_pivot_parallel, truncated_pivot_sequential};
use truncpivot_core::stream::{
    read_stream_file, stream_adaptive, stream_fixed_permutation, to_events, EdgeSource,
    FixedOrderSource, PublicState, TraceConfig,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::{BoundKind, ExperimentReport, RunRecord};
use crate::replay::ReplayFile;
use crate::spec::{AlgoKind, ExperimentSpec, MpcLeader, MpcPlacement, OrderSpec, SpecError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("capacity error: {0}")]
    Capacity(String),
}

impl From<SpecError> for RunError {
    fn from(e: SpecError) -> Self {
        RunError::Spec(e.to_string())
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: ExperimentReport,
    /// Replay payloads for runs that surfaced violations.
    pub replays: Vec<ReplayFile>,
}

/// splitmix64; decorrelates per-trial seeds from the user-facing seed list.
fn mix(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub(crate) struct BoundInfo {
    value: Option<u64>,
    kind: Option<BoundKind>,
}

/// Certified lower bound for ratio reporting: exact optimum for tiny
/// graphs, the planted clustering's cost when ground truth exists, a
/// greedy triangle packing otherwise (skipped when enumeration would be
/// quadratic-degree expensive).
fn lower_bound(graph: &SignedGraph, truth: Option<&Clustering>, seed: u64) -> BoundInfo {
    if graph.n() <= 10 {
        let (opt, _) = brute_force_opt(graph, 10).expect("within limit");
        return BoundInfo {
            value: Some(opt),
            kind: Some(BoundKind::BruteForce),
        };
    }
    if let Some(truth) = truth {
        let cost = disagreements(graph, truth).expect("truth covers graph");
        return BoundInfo {
            value: Some(cost),
            kind: Some(BoundKind::PlantedTruth),
        };
    }
    let deg_sq: u64 = (0..graph.n() as u32)
        .map(|u| (graph.degree(u) as u64).pow(2))
        .sum();
    if deg_sq <= 200_000_000 {
        return BoundInfo {
            value: Some(triangle_packing_lower_bound(graph, seed)),
            kind: Some(BoundKind::TrianglePacking),
        };
    }
    BoundInfo {
        value: None,
        kind: None,
    }
}

/// Wraps a source and logs the emitted order for replay files.
struct RecordingSource<S> {
    inner: S,
    log: Vec<(u32, u32)>,
}

impl<S: EdgeSource> EdgeSource for RecordingSource<S> {
    fn next_edge(&mut self, public: PublicState<'_>) -> Option<(u32, u32)> {
        let e = self.inner.next_edge(public);
        if let Some(edge) = e {
            self.log.push(edge);
        }
        e
    }
}

/// Loads a recorded stream and checks it is a permutation of the graph's
/// edge set (costs are evaluated against the generated graph, so a foreign
/// stream would silently cluster a different instance).
fn load_stream_for(graph: &SignedGraph, path: &std::path::Path) -> Result<Vec<(u32, u32)>, RunError> {
    let (file_n, order) = read_stream_file(path).map_err(|e| RunError::Spec(e.to_string()))?;
    if file_n != graph.n() {
        return Err(RunError::Spec(format!(
            "stream file is for n = {file_n}, graph has n = {}",
            graph.n()
        )));
    }
    if order.len() != graph.num_edges() {
        return Err(RunError::Spec(format!(
            "stream file has {} events, graph has {} edges",
            order.len(),
            graph.num_edges()
        )));
    }
    for &(u, v) in &order {
        if !graph.has_edge(u, v) {
            return Err(RunError::Spec(format!(
                "stream file contains edge ({u}, {v}) not present in the graph"
            )));
        }
    }
    Ok(order)
}

fn capacity_or_spec(e: MpcError) -> RunError {
    match e {
        MpcError::ShardOverflow { .. }
        | MpcError::LeaderCapacity { .. }
        | MpcError::BudgetExceeded { .. } => RunError::Capacity(e.to_string()),
        other => RunError::Spec(other.to_string()),
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<RunOutput, RunError> {
    let params = spec.validate()?;
    let mut records = Vec::new();
    let mut replays = Vec::new();
    for &seed in &spec.seeds {
        let (graph, truth) = spec.generator.build(seed)?;
        let bound = lower_bound(&graph, truth.as_ref(), seed);
        if spec.algo == AlgoKind::Mpc {
            records.extend(run_mpc_seed(spec, &params, &graph, &bound, seed)?);
            continue;
        }
        for trial in 0..spec.trials {
            let (record, replay) =
                run_single(spec, &params, &graph, &bound, seed, trial, None)?;
            if record.violations > 0 {
                replays.push(replay.expect("violating runs carry replay data"));
            }
            records.push(record);
        }
    }
    Ok(RunOutput {
        report: ExperimentReport::new(spec.clone(), records),
        replays,
    })
}

fn finish_record(
    seed: u64,
    trial: usize,
    cost: u64,
    bound: &BoundInfo,
    started: Instant,
) -> RunRecord {
    let ratio = match bound.value {
        Some(b) if b > 0 => Some(cost as f64 / b as f64),
        _ => None,
    };
    RunRecord {
        seed,
        trial,
        cost,
        lower_bound: bound.value,
        bound_kind: bound.kind,
        ratio,
        peak_slots: None,
        gstore_edges: None,
        rounds: None,
        peak_machine_words: None,
        violations: 0,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs one (seed, trial) cell for the non-MPC algorithms. When
/// `order_override` is given (replay verification), it supplies the exact
/// stream order instead of the spec's order source.
pub(crate) fn run_single(
    spec: &ExperimentSpec,
    params: &TruncationParams,
    graph: &SignedGraph,
    bound: &BoundInfo,
    seed: u64,
    trial: usize,
    order_override: Option<&[(u32, u32)]>,
) -> Result<(RunRecord, Option<ReplayFile>), RunError> {
    let n = graph.n();
    let algo_seed = mix(seed, trial as u64);
    let order_seed = mix(seed, 0x0DD0 + trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(algo_seed);
    let started = Instant::now();
    let cost_of = |c: &Clustering| disagreements(graph, c).expect("clustering covers graph");

    let fixed_order = |perm: &Permutation| -> Result<Vec<(u32, u32)>, RunError> {
        if let Some(order) = order_override {
            return Ok(order.to_vec());
        }
        match &spec.order {
            OrderSpec::Random => Ok(random_order(graph, order_seed)),
            OrderSpec::Adversary => Ok(greedy_fixed_order(graph, perm, params, order_seed)),
            OrderSpec::File { path } => load_stream_for(graph, path),
        }
    };

    match spec.algo {
        AlgoKind::Pivot => {
            let perm = Permutation::random(n, &mut rng);
            let out = classic_pivot(graph, &perm);
            Ok((
                finish_record(seed, trial, cost_of(&out.clustering), bound, started),
                None,
            ))
        }
        AlgoKind::TpParallel | AlgoKind::TpSequential => {
            let perm = Permutation::random(n, &mut rng);
            let out = if spec.algo == AlgoKind::TpParallel {
                truncated_pivot_parallel(graph, &perm, params)
            } else {
                truncated_pivot_sequential(graph, &perm, params)
            };
            let mut record =
                finish_record(seed, trial, cost_of(&out.clustering), bound, started);
            record.gstore_edges = Some(measure_gstore(graph, &perm, params));
            Ok((record, None))
        }
        AlgoKind::StreamFixed => {
            let perm = Permutation::random(n, &mut rng);
            let order = fixed_order(&perm)?;
            let out = stream_fixed_permutation(
                to_events(order),
                n,
                &perm,
                params,
                TraceConfig::peak_only(),
            )
            .map_err(|e| RunError::Spec(e.to_string()))?;
            let mut record =
                finish_record(seed, trial, cost_of(&out.outcome.clustering), bound, started);
            record.peak_slots = Some(out.trace.peak_slots as u64);
            record.gstore_edges = Some(measure_gstore(graph, &perm, params));
            Ok((record, None))
        }
        AlgoKind::StreamAdaptive => {
            let inner: Box<dyn EdgeSource> = if let Some(order) = order_override {
                Box::new(FixedOrderSource::new(order.to_vec()))
            } else {
                match &spec.order {
                    OrderSpec::Random => {
                        Box::new(FixedOrderSource::new(random_order(graph, order_seed)))
                    }
                    OrderSpec::Adversary => {
                        Box::new(GreedyAdaptiveAdversary::new(graph, order_seed))
                    }
                    OrderSpec::File { path } => {
                        Box::new(FixedOrderSource::new(load_stream_for(graph, path)?))
                    }
                }
            };
            let mut source = RecordingSource {
                inner,
                log: Vec::new(),
            };
            let out = stream_adaptive(
                &mut source,
                n,
                params,
                spec.rank_bits_factor,
                algo_seed,
                TraceConfig::peak_only(),
            )
            .map_err(|e| RunError::Spec(e.to_string()))?;
            let mut record =
                finish_record(seed, trial, cost_of(&out.outcome.clustering), bound, started);
            record.peak_slots = Some(out.trace.peak_slots as u64);
            record.violations = out.tails_violations.len() as u32;
            let replay = if record.violations > 0 {
                Some(ReplayFile::for_violation(
                    spec,
                    seed,
                    trial,
                    source.log,
                    &out,
                    record.cost,
                ))
            } else {
                None
            };
            Ok((record, replay))
        }
        AlgoKind::Mpc => unreachable!("MPC runs are handled per seed"),
    }
}

fn run_mpc_seed(
    spec: &ExperimentSpec,
    params: &TruncationParams,
    graph: &SignedGraph,
    bound: &BoundInfo,
    seed: u64,
) -> Result<Vec<RunRecord>, RunError> {
    let mut topo = MpcTopology::new(spec.mpc_machines, spec.mpc_words);
    topo.placement = match spec.mpc_placement {
        MpcPlacement::Contiguous => Placement::Contiguous,
        MpcPlacement::Hashed => Placement::Hashed,
    };
    topo.leader_mode = match spec.mpc_leader {
        MpcLeader::PerTrial => LeaderMode::PerTrial,
        MpcLeader::Single => LeaderMode::Single,
    };
    let started = Instant::now();
    let report =
        mpc_truncated_pivot(graph, &topo, params, spec.trials, seed).map_err(capacity_or_spec)?;
    let wall_each = started.elapsed().as_secs_f64() * 1e3 / spec.trials as f64;
    Ok(report
        .trial_costs
        .iter()
        .enumerate()
        .map(|(t, &cost)| {
            let ratio = match bound.value {
                Some(b) if b > 0 => Some(cost as f64 / b as f64),
                _ => None,
            };
            RunRecord {
                seed,
                trial: t,
                cost,
                lower_bound: bound.value,
                bound_kind: bound.kind,
                ratio,
                peak_slots: None,
                gstore_edges: None,
                rounds: Some(report.rounds as u32),
                peak_machine_words: Some(report.peak_machine_words),
                violations: 0,
                wall_ms: wall_each,
            }
        })
        .collect())
}

/// Re-runs a single record from a report for verification; returns the
/// recomputed cost.
pub fn recompute_record(
    spec: &ExperimentSpec,
    seed: u64,
    trial: usize,
    order_override: Option<&[(u32, u32)]>,
) -> Result<RunRecord, RunError> {
    let params = spec.validate()?;
    let (graph, truth) = spec.generator.build(seed)?;
    let bound = lower_bound(&graph, truth.as_ref(), seed);
    if spec.algo == AlgoKind::Mpc {
        let records = run_mpc_seed(spec, &params, &graph, &bound, seed)?;
        return records
            .into_iter()
            .find(|r| r.trial == trial)
            .ok_or_else(|| RunError::Spec(format!("trial {trial} out of range")));
    }
    let (record, _) = run_single(spec, &params, &graph, &bound, seed, trial, order_override)?;
    Ok(record)
}
