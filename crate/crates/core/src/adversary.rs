//! Stream-order generators, from uniform shuffles to the greedy memory
//! adversaries that stress the streaming variants' peak slot usage.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::SignedGraph;
use crate::params::TruncationParams;
use crate::perm::Permutation;
use crate::stream::{EdgeSource, PublicState};

/// Uniformly shuffled edge order.
pub fn random_order(graph: &SignedGraph, seed: u64) -> Vec<(u32, u32)> {
    let mut order: Vec<(u32, u32)> = graph.edges().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order
}

/// Edges in `(u, v)` lexicographic order; a convenient reproducible order.
pub fn lexicographic_order(graph: &SignedGraph) -> Vec<(u32, u32)> {
    graph.edges().collect()
}

/// Greedy memory adversary against the fixed-permutation variant. Knowing
/// `pi`, it knows each node `u` turns uninteresting the moment its degree
/// reaches `d*(u)`, the smallest degree with `pi_u >= tau_u`. It first
/// emits a maximal set of safe edges (both endpoints stay strictly below
/// their thresholds, most-constrained nodes served first), then releases
/// the threshold-crossing edges, those touching low-rank nodes last.
pub fn greedy_fixed_order(
    graph: &SignedGraph,
    perm: &Permutation,
    params: &TruncationParams,
    seed: u64,
) -> Vec<(u32, u32)> {
    let n = graph.n();
    assert_eq!(perm.len(), n, "permutation covers the graph's nodes");
    let numerator = params.threshold_numerator(n);

    // Remaining safe capacity per node: d*(u) - 1 more edges keep it
    // interesting.
    let mut budget: Vec<u64> = (0..n)
        .map(|u| deletion_degree(numerator, perm.rank(u as u32)).saturating_sub(1))
        .collect();

    // Adjacency in ascending rank order (descending capacity), built by one
    // sweep over nodes in rank order.
    let mut adj_by_rank: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &p in &perm.order() {
        for &w in graph.neighbors(p) {
            adj_by_rank[w as usize].push(p);
        }
    }

    let mut emitted = EdgeMarks::new(n, graph.num_edges());
    let mut order: Vec<(u32, u32)> = Vec::with_capacity(graph.num_edges());

    // Most-constrained nodes first: descending rank.
    let mut by_rank_desc = perm.order();
    by_rank_desc.reverse();
    for &u in &by_rank_desc {
        if budget[u as usize] == 0 {
            continue;
        }
        for &v in &adj_by_rank[u as usize] {
            if budget[u as usize] == 0 {
                break;
            }
            if budget[v as usize] == 0 || emitted.contains(u, v) {
                continue;
            }
            emitted.insert(u, v);
            order.push((u, v));
            budget[u as usize] -= 1;
            budget[v as usize] -= 1;
        }
    }

    // Unsafe remainder: shuffle for tie variety, then release edges that
    // kill high-rank nodes first so low-rank nodes stay interesting (and
    // keep their stored edges) as long as possible.
    let mut rest: Vec<(u32, u32)> = graph
        .edges()
        .filter(|&(u, v)| !emitted.contains(u, v))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rest.shuffle(&mut rng);
    rest.sort_by_key(|&(u, v)| std::cmp::Reverse(perm.rank(u).max(perm.rank(v))));
    order.extend(rest);
    debug_assert_eq!(order.len(), graph.num_edges());
    order
}

/// Smallest degree at which a node of the given rank becomes uninteresting
/// under the fixed permutation; `u64::MAX` when no degree suffices.
fn deletion_degree(numerator: f64, rank: u32) -> u64 {
    let rank_f = rank as f64;
    let uninteresting = |d: u64| d > 0 && rank_f >= numerator / d as f64;
    let guess = (numerator / rank_f).ceil();
    if !guess.is_finite() || guess >= u64::MAX as f64 {
        return u64::MAX;
    }
    let mut d = (guess as u64).max(1);
    while d > 1 && uninteresting(d - 1) {
        d -= 1;
    }
    while !uninteresting(d) {
        d += 1;
    }
    d
}

/// Greedy memory adversary for the adaptive variant. It sees only the
/// public state, so the best it can do is spend edges whose endpoints are
/// both still interesting before anything else: every such edge adds two
/// slots and pushes two nodes toward their next coin flip.
///
/// Edges are held in three lazily-maintained tiers (both endpoints
/// interesting, one, none); status only degrades, so each edge moves
/// through the tiers at most twice and the source runs in amortized O(1)
/// per event.
pub struct GreedyAdaptiveAdversary {
    both: Vec<(u32, u32)>,
    both_cursor: usize,
    one: Vec<(u32, u32)>,
    one_cursor: usize,
    dead: Vec<(u32, u32)>,
    dead_cursor: usize,
}

impl GreedyAdaptiveAdversary {
    pub fn new(graph: &SignedGraph, seed: u64) -> Self {
        let mut both: Vec<(u32, u32)> = graph.edges().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        both.shuffle(&mut rng);
        GreedyAdaptiveAdversary {
            both,
            both_cursor: 0,
            one: Vec::new(),
            one_cursor: 0,
            dead: Vec::new(),
            dead_cursor: 0,
        }
    }
}

impl EdgeSource for GreedyAdaptiveAdversary {
    fn next_edge(&mut self, public: PublicState<'_>) -> Option<(u32, u32)> {
        while self.both_cursor < self.both.len() {
            let (u, v) = self.both[self.both_cursor];
            self.both_cursor += 1;
            match (public.is_interesting(u), public.is_interesting(v)) {
                (true, true) => return Some((u, v)),
                (false, false) => self.dead.push((u, v)),
                _ => self.one.push((u, v)),
            }
        }
        if !self.both.is_empty() {
            // Fully scanned; release the backing store.
            self.both = Vec::new();
            self.both_cursor = 0;
        }
        while self.one_cursor < self.one.len() {
            let (u, v) = self.one[self.one_cursor];
            self.one_cursor += 1;
            if public.is_interesting(u) || public.is_interesting(v) {
                return Some((u, v));
            }
            self.dead.push((u, v));
        }
        if self.dead_cursor < self.dead.len() {
            let e = self.dead[self.dead_cursor];
            self.dead_cursor += 1;
            return Some(e);
        }
        None
    }
}

/// Bit/hash marker for emitted edges.
enum EdgeMarks {
    Bits { n: usize, bits: Vec<u64> },
    Set(std::collections::HashSet<(u32, u32)>),
}

impl EdgeMarks {
    fn new(n: usize, capacity: usize) -> Self {
        if n <= 1 << 14 {
            EdgeMarks::Bits {
                n,
                bits: vec![0u64; (n * n).div_ceil(64)],
            }
        } else {
            EdgeMarks::Set(std::collections::HashSet::with_capacity(capacity))
        }
    }

    fn key(u: u32, v: u32) -> (u32, u32) {
        if u < v {
            (u, v)
        } else {
            (v, u)
        }
    }

    fn contains(&self, u: u32, v: u32) -> bool {
        let (a, b) = Self::key(u, v);
        match self {
            EdgeMarks::Bits { n, bits } => {
                let idx = a as usize * *n + b as usize;
                bits[idx / 64] >> (idx % 64) & 1 == 1
            }
            EdgeMarks::Set(set) => set.contains(&(a, b)),
        }
    }

    fn insert(&mut self, u: u32, v: u32) {
        let (a, b) = Self::key(u, v);
        match self {
            EdgeMarks::Bits { n, bits } => {
                let idx = a as usize * *n + b as usize;
                bits[idx / 64] |= 1 << (idx % 64);
            }
            EdgeMarks::Set(set) => {
                set.insert((a, b));
            }
        }
    }
}
