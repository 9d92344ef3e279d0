//! Seeded graph generators for experiments and tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Clustering, SignedGraph};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("cluster count {k} does not divide node count {n}")]
    UnevenClusters { n: usize, k: usize },
    #[error("cluster count must be positive")]
    ZeroClusters,
}

/// Erdos-Renyi: each pair positive independently with probability `p`.
pub fn er(n: usize, p: f64, seed: u64) -> Result<SignedGraph, GenError> {
    check_prob(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    sample_pairs(n, p, &mut rng, |u, v| {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    });
    Ok(finish(adj))
}

/// Planted partition: `k` equal ground-truth clusters; intra-cluster pairs
/// positive with probability `1 - q`, inter-cluster pairs with probability
/// `q`. Returns the graph and the planted clustering.
pub fn planted(n: usize, k: usize, q: f64, seed: u64) -> Result<(SignedGraph, Clustering), GenError> {
    check_prob(q)?;
    if k == 0 {
        return Err(GenError::ZeroClusters);
    }
    if !n.is_multiple_of(k) {
        return Err(GenError::UnevenClusters { n, k });
    }
    let block = n / k;
    let truth: Vec<u32> = (0..n).map(|u| (u / block) as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    {
        let truth = &truth;
        sample_two_rate_pairs(n, 1.0 - q, q, |u, v| truth[u as usize] == truth[v as usize], &mut rng, |u, v| {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        });
    }
    // In-class and out-of-class pairs are emitted in separate passes.
    for row in &mut adj {
        row.sort_unstable();
    }
    Ok((finish(adj), Clustering::from_assignment(truth)))
}

/// Complete positive graph.
pub fn complete(n: usize) -> SignedGraph {
    let mut adj = Vec::with_capacity(n);
    for u in 0..n as u32 {
        let mut row = Vec::with_capacity(n.saturating_sub(1));
        row.extend(0..u);
        row.extend(u + 1..n as u32);
        adj.push(row);
    }
    finish(adj)
}

/// Star: node 0 is the center, adjacent to all others.
pub fn star(n: usize) -> SignedGraph {
    let mut adj = vec![Vec::new(); n];
    if n > 1 {
        adj[0] = (1..n as u32).collect();
        for row in adj.iter_mut().skip(1) {
            row.push(0);
        }
    }
    finish(adj)
}

fn finish(adj: Vec<Vec<u32>>) -> SignedGraph {
    SignedGraph::from_adj_unchecked(adj)
}

fn check_prob(p: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenError::BadProbability(p))
    }
}

/// Visits each unordered pair independently with probability `p`, skipping
/// runs of misses geometrically so sparse graphs cost O(m) not O(n^2).
fn sample_pairs<R: Rng>(n: usize, p: f64, rng: &mut R, mut emit: impl FnMut(u32, u32)) {
    if n < 2 || p <= 0.0 {
        return;
    }
    let total = n as u64 * (n as u64 - 1) / 2;
    if p >= 1.0 {
        for idx in 0..total {
            let (u, v) = pair_from_index(idx, n);
            emit(u, v);
        }
        return;
    }
    let log1mp = (1.0 - p).ln();
    let mut idx: u64 = 0;
    loop {
        // Geometric gap: number of misses before the next hit.
        let u: f64 = rng.random();
        let gap = (u.ln() / log1mp).floor() as u64;
        idx = match idx.checked_add(gap) {
            Some(i) => i,
            None => break,
        };
        if idx >= total {
            break;
        }
        let (a, b) = pair_from_index(idx, n);
        emit(a, b);
        idx += 1;
    }
}

/// Like [`sample_pairs`] with two rates selected per pair. Dense-rate pairs
/// are Bernoulli-sampled directly; this is only used where the dense class
/// is a small fraction of all pairs (intra-cluster blocks).
fn sample_two_rate_pairs<R: Rng>(
    n: usize,
    p_in: f64,
    p_out: f64,
    is_in: impl Fn(u32, u32) -> bool,
    rng: &mut R,
    mut emit: impl FnMut(u32, u32),
) {
    // Direct per-pair sampling kept simple and exact: first the in-class
    // pairs (dense rate), then skip-sample the out-class pairs.
    if n < 2 {
        return;
    }
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if is_in(u, v) && rng.random::<f64>() < p_in {
                emit(u, v);
            }
        }
    }
    // Out-class pairs via skip sampling over the full pair index space,
    // filtered to out-class (acceptable since p_out is the sparse rate).
    sample_pairs(n, p_out, rng, |u, v| {
        if !is_in(u, v) {
            emit(u, v);
        }
    });
}

/// Decodes a lexicographic pair index into `(u, v)` with `u < v`.
fn pair_from_index(idx: u64, n: usize) -> (u32, u32) {
    let n = n as u64;
    // Row u starts at offset u*n - u*(u+3)/2... solve by float guess, then fix.
    let mut u = {
        let nf = n as f64;
        let x = idx as f64;
        let guess = nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * x).max(0.0).sqrt();
        (guess.floor() as i64).clamp(0, n as i64 - 2) as u64
    };
    let row_start = |u: u64| u * (n - 1) - (u * u - u) / 2;
    while u > 0 && row_start(u) > idx {
        u -= 1;
    }
    while u + 1 < n - 1 && row_start(u + 1) <= idx {
        u += 1;
    }
    let v = u + 1 + (idx - row_start(u));
    debug_assert!(v < n, "idx {idx} n {n} -> ({u}, {v})");
    (u as u32, v as u32)
}
