//! Ground-truth oracles: exhaustive optimum, bad-triangle enumeration and a
//! greedy disjoint-triangle packing lower bound.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{disagreements, Clustering, SignedGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {n} nodes, brute force limited to {max_n} (partition count grows as Bell numbers)")]
    TooLarge { n: usize, max_n: usize },
    #[error("triple ({0}, {1}, {2}) is not a bad triangle in this graph")]
    NotBadTriangle(u32, u32, u32),
}

/// Default node-count ceiling for [`brute_force_opt`]. Bell(11) = 678570
/// partitions is still fast; growth beyond that is explosive.
pub const BRUTE_FORCE_DEFAULT_LIMIT: usize = 11;

/// A node triple carrying exactly two positive edges and one implicit
/// negative edge. Any clustering makes at least one mistake on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BadTriangle {
    pub u: u32,
    pub v: u32,
    pub w: u32,
}

impl BadTriangle {
    /// Validates the positive/negative pattern against the graph. Nodes are
    /// stored sorted.
    pub fn new(graph: &SignedGraph, a: u32, b: u32, c: u32) -> Result<Self, OracleError> {
        let mut ids = [a, b, c];
        ids.sort_unstable();
        let [u, v, w] = ids;
        let pos = [
            graph.has_edge(u, v),
            graph.has_edge(u, w),
            graph.has_edge(v, w),
        ];
        if u == v || v == w || pos.iter().filter(|&&p| p).count() != 2 {
            return Err(OracleError::NotBadTriangle(a, b, c));
        }
        Ok(BadTriangle { u, v, w })
    }

    /// The three unordered pairs of the triangle, each as `(lo, hi)`.
    pub fn pairs(&self) -> [(u32, u32); 3] {
        [(self.u, self.v), (self.u, self.w), (self.v, self.w)]
    }
}

/// Every unordered triple with exactly two positive and one negative edge,
/// reported once. A bad triangle has a unique apex (the node on both
/// positive edges), so scanning neighbor pairs per apex visits each once.
pub fn enumerate_bad_triangles(graph: &SignedGraph) -> Vec<BadTriangle> {
    let mut out = Vec::new();
    for apex in 0..graph.n() as u32 {
        let nbrs = graph.neighbors(apex);
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !graph.has_edge(a, b) {
                    let mut ids = [apex, a, b];
                    ids.sort_unstable();
                    out.push(BadTriangle {
                        u: ids[0],
                        v: ids[1],
                        w: ids[2],
                    });
                }
            }
        }
    }
    out
}

/// Greedily packs pair-disjoint bad triangles (visit order shuffled by
/// `seed`) and returns their count. Each selected triangle forces at least
/// one disagreement on pairs no other selected triangle touches, so the
/// count is a lower bound on the optimum.
pub fn triangle_packing_lower_bound(graph: &SignedGraph, seed: u64) -> u64 {
    let mut triangles = enumerate_bad_triangles(graph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    triangles.shuffle(&mut rng);
    let mut used: HashSet<(u32, u32)> = HashSet::new();
    let mut count = 0u64;
    'next: for t in &triangles {
        for p in t.pairs() {
            if used.contains(&p) {
                continue 'next;
            }
        }
        for p in t.pairs() {
            used.insert(p);
        }
        count += 1;
    }
    count
}

/// Exhaustively enumerates all set partitions of the nodes (as restricted
/// growth strings, so each partition appears exactly once) and returns the
/// minimum disagreement cost with one witness clustering.
pub fn brute_force_opt(
    graph: &SignedGraph,
    max_n: usize,
) -> Result<(u64, Clustering), OracleError> {
    let n = graph.n();
    if n > max_n {
        return Err(OracleError::TooLarge { n, max_n });
    }
    if n == 0 {
        return Ok((0, Clustering::from_assignment(Vec::new())));
    }

    // Restricted growth string: a[0] = 0 and a[i] <= max(a[0..i]) + 1.
    let mut a = vec![0u32; n];
    let mut best_cost = u64::MAX;
    let mut best = a.clone();
    loop {
        let c = Clustering::from_assignment(a.clone());
        let cost = disagreements(graph, &c).expect("clustering covers all nodes");
        if cost < best_cost {
            best_cost = cost;
            best = a.clone();
            if best_cost == 0 {
                break;
            }
        }
        if !next_rgs(&mut a) {
            break;
        }
    }
    Ok((best_cost, Clustering::from_assignment(best)))
}

/// Advances `a` to the next restricted growth string; false when exhausted.
fn next_rgs(a: &mut [u32]) -> bool {
    let n = a.len();
    // Rightmost position that can be incremented, given the prefix maximum.
    for i in (1..n).rev() {
        let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
        if a[i] <= prefix_max {
            a[i] += 1;
            for x in &mut a[i + 1..] {
                *x = 0;
            }
            return true;
        }
    }
    false
}
