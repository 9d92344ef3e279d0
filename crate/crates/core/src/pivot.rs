//! In-memory pivot clustering: the classic greedy-MIS form, the truncated
//! parallel form, and its sequential equivalent, plus the good/bad edge
//! diagnostics around singleton clusters.
//!
//! All three functions are pure: identical `(graph, perm, params)` yield
//! bit-identical outcomes, and clusterings are returned canonicalized.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Clustering, SignedGraph};
use crate::params::TruncationParams;
use crate::perm::Permutation;

/// Unordered positive edges as `(u, v)` pairs.
pub type EdgeList = Vec<(u32, u32)>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PivotError {
    #[error("outcome carries no cluster creation iterations (produced by a non-sequential variant)")]
    MissingIterationRecords,
}

/// Result of one pivot run. `clustering` is canonical; the flag vectors are
/// indexed by node.
///
/// * `is_pivot`: greedy-MIS cluster centers.
/// * `is_uninteresting`: nodes with `pi_u >= tau_u` (always empty for the
///   classic variant).
/// * `is_singleton`: unclustered nodes that ended as singleton clusters;
///   pivot clusters of size one are not singletons in this sense.
/// * `cluster_iteration`: for the sequential variant, the iteration at
///   which each (canonical) cluster was created.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotOutcome {
    pub clustering: Clustering,
    pub is_pivot: Vec<bool>,
    pub is_uninteresting: Vec<bool>,
    pub is_singleton: Vec<bool>,
    pub cluster_iteration: Option<Vec<u32>>,
}

impl PivotOutcome {
    pub fn pivots(&self) -> Vec<u32> {
        collect_flagged(&self.is_pivot)
    }

    pub fn singletons(&self) -> Vec<u32> {
        collect_flagged(&self.is_singleton)
    }

    pub fn uninteresting(&self) -> Vec<u32> {
        collect_flagged(&self.is_uninteresting)
    }

    /// Equality of the clustering and all node flags, ignoring iteration
    /// records (which only the sequential variant produces).
    pub fn same_clustering(&self, other: &PivotOutcome) -> bool {
        self.clustering == other.clustering
            && self.is_pivot == other.is_pivot
            && self.is_uninteresting == other.is_uninteresting
            && self.is_singleton == other.is_singleton
    }

    /// Four-line text form: cluster-id list, then pivot / singleton /
    /// uninteresting flag vectors as 0/1.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let ids: Vec<String> = self
            .clustering
            .assignment()
            .iter()
            .map(|c| c.to_string())
            .collect();
        let _ = writeln!(out, "clusters {}", ids.join(" "));
        for (name, flags) in [
            ("pivot", &self.is_pivot),
            ("singleton", &self.is_singleton),
            ("uninteresting", &self.is_uninteresting),
        ] {
            let bits: String = flags.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let _ = writeln!(out, "{name} {bits}");
        }
        out
    }
}

fn collect_flagged(flags: &[bool]) -> Vec<u32> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(u, &f)| f.then_some(u as u32))
        .collect()
}

/// Classic pivot: iterate the permutation; every still-unclustered node
/// becomes a cluster center and claims all unclustered neighbors. Every
/// node ends up clustered.
pub fn classic_pivot(graph: &SignedGraph, perm: &Permutation) -> PivotOutcome {
    let n = graph.n();
    assert_eq!(perm.len(), n, "permutation covers the graph's nodes");
    let mut rep = vec![u32::MAX; n];
    let mut is_pivot = vec![false; n];
    for &u in &perm.order() {
        if rep[u as usize] == u32::MAX {
            is_pivot[u as usize] = true;
            rep[u as usize] = u;
            for &w in graph.neighbors(u) {
                if rep[w as usize] == u32::MAX {
                    rep[w as usize] = u;
                }
            }
        }
    }
    PivotOutcome {
        clustering: Clustering::from_assignment(rep).canonicalize(),
        is_pivot,
        is_uninteresting: vec![false; n],
        is_singleton: vec![false; n],
        cluster_iteration: None,
    }
}

/// Truncated pivot, parallel formulation: nodes with `pi_u >= tau_u` are
/// set aside, a greedy MIS over the remaining (interesting) nodes picks the
/// pivots, and every non-pivot joins its smallest-rank pivot neighbor `v`
/// provided `pi_v < tau_u`; otherwise it forms a singleton cluster.
pub fn truncated_pivot_parallel(
    graph: &SignedGraph,
    perm: &Permutation,
    params: &TruncationParams,
) -> PivotOutcome {
    let n = graph.n();
    assert_eq!(perm.len(), n, "permutation covers the graph's nodes");
    let tau: Vec<f64> = (0..n)
        .map(|u| params.tau_for_degree(n, graph.degree(u as u32)))
        .collect();
    let interesting: Vec<bool> = (0..n)
        .map(|u| (perm.rank(u as u32) as f64) < tau[u])
        .collect();

    // Greedy MIS on the subgraph induced by interesting nodes, in rank order.
    let mut is_pivot = vec![false; n];
    let mut killed = vec![false; n];
    for &u in &perm.order() {
        let ui = u as usize;
        if interesting[ui] && !killed[ui] {
            is_pivot[ui] = true;
            for &w in graph.neighbors(u) {
                if interesting[w as usize] {
                    killed[w as usize] = true;
                }
            }
        }
    }

    let mut rep = vec![u32::MAX; n];
    let mut is_singleton = vec![false; n];
    for u in 0..n {
        if is_pivot[u] {
            rep[u] = u as u32;
            continue;
        }
        let mut best: Option<u32> = None;
        for &w in graph.neighbors(u as u32) {
            if is_pivot[w as usize] && best.is_none_or(|b| perm.rank(w) < perm.rank(b)) {
                best = Some(w);
            }
        }
        match best {
            Some(v) if (perm.rank(v) as f64) < tau[u] => rep[u] = v,
            _ => {
                rep[u] = u as u32;
                is_singleton[u] = true;
            }
        }
    }

    PivotOutcome {
        clustering: Clustering::from_assignment(rep).canonicalize(),
        is_pivot,
        is_uninteresting: interesting.iter().map(|&i| !i).collect(),
        is_singleton,
        cluster_iteration: None,
    }
}

/// Truncated pivot, sequential formulation: at iteration `i`, every active
/// node whose degree meets the cut `l_i = (c/eps) n log2(n) / i` becomes a
/// singleton; then the i-th node of the permutation, if active, forms a
/// pivot cluster with its active neighbors. Records per-cluster creation
/// iterations for the singleton diagnostics.
pub fn truncated_pivot_sequential(
    graph: &SignedGraph,
    perm: &Permutation,
    params: &TruncationParams,
) -> PivotOutcome {
    let n = graph.n();
    assert_eq!(perm.len(), n, "permutation covers the graph's nodes");
    let tau: Vec<f64> = (0..n)
        .map(|u| params.tau_for_degree(n, graph.degree(u as u32)))
        .collect();

    // deg(u) >= l_i first holds at i = ceil(tau_u); bucket nodes by that
    // iteration instead of rescanning all active nodes every round.
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for (u, &t) in tau.iter().enumerate() {
        if t.is_finite() {
            let s = t.ceil();
            if s <= n as f64 {
                buckets[s as usize].push(u as u32);
            }
        }
    }

    let order = perm.order();
    let mut active = vec![true; n];
    let mut rep = vec![u32::MAX; n];
    let mut is_pivot = vec![false; n];
    let mut is_singleton = vec![false; n];
    let mut iteration_of_rep = vec![0u32; n];
    for i in 1..=n {
        for &u in &buckets[i] {
            let ui = u as usize;
            if active[ui] {
                active[ui] = false;
                rep[ui] = u;
                is_singleton[ui] = true;
                iteration_of_rep[ui] = i as u32;
            }
        }
        let w = order[i - 1];
        let wi = w as usize;
        if active[wi] {
            active[wi] = false;
            rep[wi] = w;
            is_pivot[wi] = true;
            iteration_of_rep[wi] = i as u32;
            for &x in graph.neighbors(w) {
                if active[x as usize] {
                    active[x as usize] = false;
                    rep[x as usize] = w;
                }
            }
        }
    }
    debug_assert!(rep.iter().all(|&r| r != u32::MAX));

    let clustering = Clustering::from_assignment(rep.clone()).canonicalize();
    let mut cluster_iteration = vec![0u32; clustering.num_clusters()];
    for u in 0..n {
        cluster_iteration[clustering.cluster_of(u as u32) as usize] =
            iteration_of_rep[rep[u] as usize];
    }

    PivotOutcome {
        clustering,
        is_pivot,
        is_uninteresting: (0..n)
            .map(|u| (perm.rank(u as u32) as f64) >= tau[u])
            .collect(),
        is_singleton,
        cluster_iteration: Some(cluster_iteration),
    }
}

/// Splits the positive edges incident on singleton clusters into good and
/// bad: an edge is good when its non-singleton endpoint joined a pivot
/// cluster strictly before the singleton cluster was created. Requires the
/// iteration records of the sequential variant.
pub fn classify_singleton_edges(
    graph: &SignedGraph,
    outcome: &PivotOutcome,
) -> Result<(EdgeList, EdgeList), PivotError> {
    let iters = outcome
        .cluster_iteration
        .as_deref()
        .ok_or(PivotError::MissingIterationRecords)?;
    let assign = &outcome.clustering;
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for (u, v) in graph.edges() {
        let su = outcome.is_singleton[u as usize];
        let sv = outcome.is_singleton[v as usize];
        if !su && !sv {
            continue;
        }
        let is_good = if su && sv {
            false
        } else {
            let (sing, other) = if su { (u, v) } else { (v, u) };
            iters[assign.cluster_of(other) as usize] < iters[assign.cluster_of(sing) as usize]
        };
        if is_good {
            good.push((u, v));
        } else {
            bad.push((u, v));
        }
    }
    Ok((good, bad))
}
