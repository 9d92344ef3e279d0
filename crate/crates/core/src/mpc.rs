//! Round-by-round simulator of the linear-space MPC protocol.
//!
//! Machines hold a node shard (each node co-located with its incident
//! edges) and communicate in four synchronous rounds:
//!
//! 1. every machine ships per-node degrees and the adjacency of its
//!    interesting nodes to each trial's leader;
//! 2. leaders run the greedy MIS and cluster assignment on the shipped
//!    subgraph and broadcast the label vector;
//! 3. machines tally their owned disagreements (an edge is charged to its
//!    lower-id endpoint's machine) and ship cut counts plus per-cluster
//!    internal positive-edge counts back to the leaders;
//! 4. leaders forward per-trial costs and labels to machine 0, which
//!    selects the cheapest trial.
//!
//! Every quantity on the wire is counted in words (one word per node id,
//! edge slot, cluster label, or counter; headers free) and every machine is
//! audited against its budget at each round barrier.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Clustering, SignedGraph};
use crate::params::TruncationParams;
use crate::perm::Permutation;
use crate::stream::cluster_from_store;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MpcError {
    #[error("topology invalid: {0}")]
    BadTopology(String),
    #[error("machine {machine} shard needs {words} words, budget is {budget}")]
    ShardOverflow {
        machine: usize,
        words: u64,
        budget: u64,
    },
    #[error(
        "leader machine {machine} over budget while receiving trial {trial}: {words} words > {budget}"
    )]
    LeaderCapacity {
        machine: usize,
        trial: usize,
        words: u64,
        budget: u64,
    },
    #[error("machine {machine} over budget at round {round}: {words} words > {budget}")]
    BudgetExceeded {
        round: usize,
        machine: usize,
        words: u64,
        budget: u64,
    },
    #[error("at least one trial is required")]
    NoTrials,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Nodes assigned to machines in contiguous, balanced blocks.
    Contiguous,
    /// Deterministically hashed assignment, for skew experiments.
    Hashed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderMode {
    /// Each trial gets its own leader (trial t on machine t mod M), keeping
    /// per-machine load at one trial's worth.
    PerTrial,
    /// All trials funnel to machine 0, reproducing the single-leader layout
    /// (budget must then cover all trials at once).
    Single,
}

#[derive(Debug, Clone)]
pub struct MpcTopology {
    pub machines: usize,
    pub words_per_machine: u64,
    pub placement: Placement,
    pub leader_mode: LeaderMode,
}

impl MpcTopology {
    pub fn new(machines: usize, words_per_machine: u64) -> Self {
        MpcTopology {
            machines,
            words_per_machine,
            placement: Placement::Contiguous,
            leader_mode: LeaderMode::PerTrial,
        }
    }

    fn machine_of(&self, u: u32, n: usize) -> usize {
        match self.placement {
            Placement::Contiguous => ((u as u64 * self.machines as u64) / n as u64) as usize,
            Placement::Hashed => {
                // splitmix64 scramble of the node id.
                let mut x = u as u64 ^ 0x9e37_79b9_7f4a_7c15;
                x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                ((x ^ (x >> 31)) % self.machines as u64) as usize
            }
        }
    }

    fn leader_of(&self, trial: usize) -> usize {
        match self.leader_mode {
            LeaderMode::PerTrial => trial % self.machines,
            LeaderMode::Single => 0,
        }
    }
}

/// Word accounting for one communication round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLedger {
    /// Words received from other machines this round, per machine.
    pub received_words: Vec<u64>,
    /// State carried into the round barrier (beyond the input shard).
    pub retained_words: Vec<u64>,
    /// shard + retained + received, audited against the budget.
    pub resident_words: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct MpcRunReport {
    pub rounds: usize,
    pub peak_machine_words: u64,
    pub shard_words: Vec<u64>,
    pub trial_costs: Vec<u64>,
    pub trial_clusterings: Vec<Clustering>,
    pub selected_trial: usize,
    pub selected: Clustering,
    pub ledger: Vec<RoundLedger>,
}

impl MpcRunReport {
    /// Recomputes every resident figure from the ledger's received/retained
    /// columns and checks the recorded value and the budget. Returns false
    /// on any mismatch.
    pub fn verify_ledger(&self, budget: u64) -> bool {
        self.ledger.iter().all(|round| {
            (0..self.shard_words.len()).all(|m| {
                let resident =
                    self.shard_words[m] + round.retained_words[m] + round.received_words[m];
                resident == round.resident_words[m] && resident <= budget
            })
        })
    }
}

/// Deterministic per-trial permutations; reference runs re-derive the same
/// sequence from the same seed.
pub fn trial_permutations(n: usize, trials: usize, seed: u64) -> Vec<Permutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| Permutation::random(n, &mut rng)).collect()
}

/// Number of edges with at least one interesting endpoint under the given
/// permutation: the size of the subgraph the machines ship to a leader.
pub fn measure_gstore(graph: &SignedGraph, perm: &Permutation, params: &TruncationParams) -> u64 {
    let n = graph.n();
    assert_eq!(perm.len(), n, "permutation covers the graph's nodes");
    let interesting: Vec<bool> = (0..n)
        .map(|u| !params.is_uninteresting(n, graph.degree(u as u32), perm.rank(u as u32)))
        .collect();
    graph
        .edges()
        .filter(|&(u, v)| interesting[u as usize] || interesting[v as usize])
        .count() as u64
}

/// Runs `trials` independent truncated-pivot instances through the 4-round
/// protocol and returns the cheapest clustering with full word-level
/// accounting.
pub fn mpc_truncated_pivot(
    graph: &SignedGraph,
    topo: &MpcTopology,
    params: &TruncationParams,
    trials: usize,
    seed: u64,
) -> Result<MpcRunReport, MpcError> {
    if trials == 0 {
        return Err(MpcError::NoTrials);
    }
    if topo.machines == 0 {
        return Err(MpcError::BadTopology("zero machines".into()));
    }
    let n = graph.n();
    if n == 0 {
        return Err(MpcError::BadTopology("empty graph".into()));
    }
    let machines = topo.machines;
    let budget = topo.words_per_machine;

    let machine_of: Vec<usize> = (0..n as u32).map(|u| topo.machine_of(u, n)).collect();
    let mut shard_words = vec![0u64; machines];
    for u in 0..n {
        shard_words[machine_of[u]] += 1 + graph.degree(u as u32) as u64;
    }
    for (m, &w) in shard_words.iter().enumerate() {
        if w > budget {
            return Err(MpcError::ShardOverflow {
                machine: m,
                words: w,
                budget,
            });
        }
    }

    let perms = trial_permutations(n, trials, seed);
    let numerator = params.threshold_numerator(n);
    let degrees: Vec<u32> = (0..n).map(|u| graph.degree(u as u32) as u32).collect();
    let interesting_per_trial: Vec<Vec<bool>> = perms
        .iter()
        .map(|perm| {
            (0..n)
                .map(|u| {
                    !params.is_uninteresting(n, degrees[u] as usize, perm.rank(u as u32))
                })
                .collect()
        })
        .collect();

    let mut ledger: Vec<RoundLedger> = Vec::with_capacity(4);
    let mut retained = vec![0u64; machines];
    let mut peak = shard_words.iter().copied().max().unwrap_or(0);

    let close_round =
        |round: usize,
         received: Vec<u64>,
         retained: &[u64],
         shard: &[u64],
         peak: &mut u64|
         -> Result<RoundLedger, MpcError> {
            let resident: Vec<u64> = (0..machines)
                .map(|m| shard[m] + retained[m] + received[m])
                .collect();
            for (m, &w) in resident.iter().enumerate() {
                *peak = (*peak).max(w);
                if w > budget {
                    return Err(MpcError::BudgetExceeded {
                        round,
                        machine: m,
                        words: w,
                        budget,
                    });
                }
            }
            Ok(RoundLedger {
                received_words: received,
                retained_words: retained.to_vec(),
                resident_words: resident,
            })
        };

    // ---- Round 1: degrees + interesting adjacency to trial leaders.
    // Each machine contributes (id, degree) pairs for its nodes plus the
    // neighbor lists of its interesting nodes; the leader's own share stays
    // in its shard and is not re-sent.
    let mut received = vec![0u64; machines];
    for (t, interesting) in interesting_per_trial.iter().enumerate() {
        let leader = topo.leader_of(t);
        let mut from_others = 0u64;
        for u in 0..n {
            if machine_of[u] != leader {
                let words = if interesting[u] {
                    1 + degrees[u] as u64
                } else {
                    0
                };
                from_others += words + 2;
            }
        }
        received[leader] += from_others;
        if shard_words[leader] + received[leader] > budget {
            return Err(MpcError::LeaderCapacity {
                machine: leader,
                trial: t,
                words: shard_words[leader] + received[leader],
                budget,
            });
        }
    }
    ledger.push(close_round(1, received, &retained, &shard_words, &mut peak)?);

    // Between rounds 1 and 2 each leader computes labels from the shipped
    // data alone (local shard parts are read in place, remote parts out of
    // the round-1 messages already charged at the barrier). Only the label
    // vector survives into the next rounds.
    let mut trial_outcomes: Vec<Clustering> = Vec::with_capacity(trials);
    for t in 0..trials {
        let leader = topo.leader_of(t);
        let interesting = &interesting_per_trial[t];
        let stored: Vec<Vec<u32>> = (0..n)
            .map(|u| {
                if interesting[u] {
                    graph.neighbors(u as u32).to_vec()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let outcome =
            cluster_from_store(n, &perms[t], &degrees, interesting, &stored, numerator);
        trial_outcomes.push(outcome.clustering);
        retained[leader] += n as u64;
    }

    // ---- Round 2: leaders broadcast label vectors.
    let mut received = vec![0u64; machines];
    for t in 0..trials {
        let leader = topo.leader_of(t);
        for (m, r) in received.iter_mut().enumerate() {
            if m != leader {
                *r += n as u64;
            }
        }
    }
    ledger.push(close_round(2, received, &retained, &shard_words, &mut peak)?);

    // Machine-side tallies per trial: cut count plus per-cluster internal
    // positive-edge counts over owned edges (owner = lower-id endpoint).
    struct Tally {
        cut: u64,
        pos_by_cluster: Vec<u64>,
        nonzero: u64,
    }
    let mut tallies: Vec<Vec<Tally>> = Vec::with_capacity(trials); // [trial][machine]
    for outcome in &trial_outcomes {
        let labels = outcome.assignment();
        let k = outcome.num_clusters();
        let mut per_machine: Vec<Tally> = (0..machines)
            .map(|_| Tally {
                cut: 0,
                pos_by_cluster: vec![0u64; k],
                nonzero: 0,
            })
            .collect();
        for (u, v) in graph.edges() {
            let owner = machine_of[u as usize];
            let tally = &mut per_machine[owner];
            if labels[u as usize] == labels[v as usize] {
                let c = labels[u as usize] as usize;
                if tally.pos_by_cluster[c] == 0 {
                    tally.nonzero += 1;
                }
                tally.pos_by_cluster[c] += 1;
            } else {
                tally.cut += 1;
            }
        }
        tallies.push(per_machine);
    }

    // ---- Round 3: tallies back to the leaders, which assemble the costs.
    let mut received = vec![0u64; machines];
    let mut trial_costs = vec![0u64; trials];
    for t in 0..trials {
        let leader = topo.leader_of(t);
        let labels = trial_outcomes[t].assignment();
        let k = trial_outcomes[t].num_clusters();
        let mut sizes = vec![0u64; k];
        for &c in labels {
            sizes[c as usize] += 1;
        }
        let mut cut = 0u64;
        let mut pos = vec![0u64; k];
        for (m, tally) in tallies[t].iter().enumerate() {
            if m != leader {
                received[leader] += 1 + 2 * tally.nonzero;
            }
            cut += tally.cut;
            for (c, &cnt) in tally.pos_by_cluster.iter().enumerate() {
                pos[c] += cnt;
            }
        }
        let internal_negative: u64 = sizes
            .iter()
            .zip(pos.iter())
            .map(|(&s, &p)| s * (s - 1) / 2 - p)
            .sum();
        trial_costs[t] = cut + internal_negative;
        retained[leader] += 1; // the cost word
    }
    ledger.push(close_round(3, received, &retained, &shard_words, &mut peak)?);

    // ---- Round 4: costs + labels to machine 0, which picks the minimum.
    let mut received = vec![0u64; machines];
    for t in 0..trials {
        if topo.leader_of(t) != 0 {
            received[0] += 2 + n as u64;
        }
    }
    ledger.push(close_round(4, received, &retained, &shard_words, &mut peak)?);

    let selected_trial = trial_costs
        .iter()
        .enumerate()
        .min_by_key(|&(t, &c)| (c, t))
        .map(|(t, _)| t)
        .expect("trials >= 1");

    Ok(MpcRunReport {
        rounds: 4,
        peak_machine_words: peak,
        shard_words,
        selected: trial_outcomes[selected_trial].clone(),
        selected_trial,
        trial_costs,
        trial_clusterings: trial_outcomes,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::disagreements;
    use crate::params::no_truncation_params;
    use crate::pivot::truncated_pivot_parallel;

    fn big_budget_topo(machines: usize) -> MpcTopology {
        MpcTopology::new(machines, u64::MAX / 4)
    }

    #[test]
    fn single_machine_matches_pivot_engine() {
        let g = gen::er(120, 0.1, 3).unwrap();
        let params = TruncationParams::new(0.2, 0.3).unwrap();
        let trials = 5;
        let report =
            mpc_truncated_pivot(&g, &big_budget_topo(1), &params, trials, 99).unwrap();
        let perms = trial_permutations(120, trials, 99);
        for (t, perm) in perms.iter().enumerate() {
            let reference = truncated_pivot_parallel(&g, perm, &params);
            assert_eq!(report.trial_clusterings[t], reference.clustering);
            assert_eq!(
                report.trial_costs[t],
                disagreements(&g, &reference.clustering).unwrap()
            );
        }
    }

    #[test]
    fn distributed_cost_equals_central_for_any_machine_count() {
        let g = gen::er(150, 0.08, 5).unwrap();
        let params = TruncationParams::new(0.2, 0.2).unwrap();
        for machines in [1, 2, 3, 8] {
            let report =
                mpc_truncated_pivot(&g, &big_budget_topo(machines), &params, 4, 7).unwrap();
            assert_eq!(report.rounds, 4);
            for (t, clustering) in report.trial_clusterings.iter().enumerate() {
                assert_eq!(
                    report.trial_costs[t],
                    disagreements(&g, clustering).unwrap(),
                    "machines = {machines}, trial = {t}"
                );
            }
            let min = *report.trial_costs.iter().min().unwrap();
            assert_eq!(report.trial_costs[report.selected_trial], min);
            assert_eq!(
                disagreements(&g, &report.selected).unwrap(),
                min
            );
        }
    }

    #[test]
    fn per_trial_results_do_not_depend_on_topology() {
        let g = gen::er(90, 0.15, 11).unwrap();
        let params = TruncationParams::new(0.2, 0.1).unwrap();
        let a = mpc_truncated_pivot(&g, &big_budget_topo(1), &params, 3, 5).unwrap();
        let mut hashed = big_budget_topo(4);
        hashed.placement = Placement::Hashed;
        let b = mpc_truncated_pivot(&g, &hashed, &params, 3, 5).unwrap();
        let mut single_leader = big_budget_topo(4);
        single_leader.leader_mode = LeaderMode::Single;
        let c = mpc_truncated_pivot(&g, &single_leader, &params, 3, 5).unwrap();
        assert_eq!(a.trial_costs, b.trial_costs);
        assert_eq!(a.trial_costs, c.trial_costs);
        assert_eq!(a.trial_clusterings, b.trial_clusterings);
    }

    #[test]
    fn ledger_verifies_and_records_four_rounds() {
        let g = gen::er(200, 0.1, 2).unwrap();
        let topo = MpcTopology::new(4, 1 << 20);
        let params = TruncationParams::new(0.2, 0.1).unwrap();
        let report = mpc_truncated_pivot(&g, &topo, &params, 6, 1).unwrap();
        assert_eq!(report.ledger.len(), 4);
        assert!(report.verify_ledger(topo.words_per_machine));
        assert!(report.peak_machine_words <= topo.words_per_machine);
    }

    #[test]
    fn shard_overflow_is_reported() {
        let g = gen::complete(64);
        let topo = MpcTopology::new(2, 100);
        let err = mpc_truncated_pivot(&g, &topo, &TruncationParams::default(), 1, 0).unwrap_err();
        assert!(matches!(err, MpcError::ShardOverflow { .. }));
    }

    #[test]
    fn leader_capacity_error_names_the_trial() {
        // Budget big enough for the shard but not for the shipped subgraph.
        let g = gen::complete(64);
        let shard_words = 64 / 2 * 64; // per machine: 32 nodes * (1 + 63)
        let topo = MpcTopology::new(2, shard_words as u64 + 500);
        let params = no_truncation_params(64, 0.2); // everything interesting
        let err = mpc_truncated_pivot(&g, &topo, &params, 2, 0).unwrap_err();
        match err {
            MpcError::LeaderCapacity { trial, words, .. } => {
                assert_eq!(trial, 0);
                assert!(words > shard_words as u64 + 500);
            }
            other => panic!("expected LeaderCapacity, got {other:?}"),
        }
    }

    #[test]
    fn measure_gstore_extremes() {
        let g = gen::er(100, 0.2, 8).unwrap();
        let perm = Permutation::identity(100);
        let all = no_truncation_params(100, 0.2);
        assert_eq!(measure_gstore(&g, &perm, &all), g.num_edges() as u64);
        let empty = SignedGraph::empty(50);
        assert_eq!(
            measure_gstore(&empty, &Permutation::identity(50), &all),
            0
        );
    }

    #[test]
    fn zero_trials_is_an_error() {
        let g = gen::er(10, 0.5, 1).unwrap();
        assert_eq!(
            mpc_truncated_pivot(&g, &big_budget_topo(1), &TruncationParams::default(), 0, 0)
                .unwrap_err(),
            MpcError::NoTrials
        );
    }
}
