//! Node permutations: the source of algorithmic randomness for all pivot
//! variants. Ranks are 1-based, matching iteration indices.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("rank list is not a bijection onto 1..={0}")]
    NotBijective(usize),
    #[error("could not parse rank token {0:?}")]
    BadToken(String),
}

/// Bijective rank assignment over nodes `0..n`; `rank(u)` is the position
/// of `u` in the processing order, in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    rank: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            rank: (1..=n as u32).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut rank: Vec<u32> = (1..=n as u32).collect();
        rank.shuffle(rng);
        Permutation { rank }
    }

    pub fn from_ranks(rank: Vec<u32>) -> Result<Self, PermError> {
        let n = rank.len();
        let mut seen = vec![false; n];
        for &r in &rank {
            if r == 0 || r as usize > n || seen[(r - 1) as usize] {
                return Err(PermError::NotBijective(n));
            }
            seen[(r - 1) as usize] = true;
        }
        Ok(Permutation { rank })
    }

    /// Builds the permutation whose processing order is `order[0], order[1], ...`.
    pub fn from_order(order: &[u32]) -> Result<Self, PermError> {
        let n = order.len();
        let mut rank = vec![0u32; n];
        for (i, &u) in order.iter().enumerate() {
            if u as usize >= n || rank[u as usize] != 0 {
                return Err(PermError::NotBijective(n));
            }
            rank[u as usize] = i as u32 + 1;
        }
        Ok(Permutation { rank })
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    /// Position of node `u`, in `1..=n`.
    pub fn rank(&self, u: u32) -> u32 {
        self.rank[u as usize]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank
    }

    /// Nodes sorted by rank: element `i` is processed at iteration `i + 1`.
    pub fn order(&self) -> Vec<u32> {
        let mut order = vec![0u32; self.rank.len()];
        for (u, &r) in self.rank.iter().enumerate() {
            order[(r - 1) as usize] = u as u32;
        }
        order
    }

    /// Whitespace-separated rank list, for reproducing counterexamples.
    pub fn to_rank_string(&self) -> String {
        self.rank
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_rank_string(s: &str) -> Result<Self, PermError> {
        let rank = s
            .split_whitespace()
            .map(|tok| tok.parse::<u32>().map_err(|_| PermError::BadToken(tok.into())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_ranks(rank)
    }
}
