//! Truncation parameters and the rank-threshold arithmetic shared by every
//! algorithm variant.
//!
//! All logarithms are base 2; changing the base only rescales `c`.

use thiserror::Error;

use crate::graph::SignedGraph;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("epsilon must lie in (0, 1/4), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("c must be positive, got {0}")]
    NonPositiveC(f64),
}

/// `epsilon` and the constant `c` controlling the truncation threshold
/// `tau_u = (c/eps) * n * log2(n) / deg(u)`.
///
/// The default `c = 8` keeps the analysis constant `alpha = c/2 - 1 = 3`
/// comfortably above 2; at desk-scale `n` this makes `tau_u > n` so
/// truncation never fires. Experiments that exercise the truncation
/// mechanism pass a small `c` explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    epsilon: f64,
    c: f64,
}

pub const DEFAULT_C: f64 = 8.0;
pub const DEFAULT_EPSILON: f64 = 0.2;

impl TruncationParams {
    pub fn new(epsilon: f64, c: f64) -> Result<Self, ParamError> {
        let epsilon_ok = epsilon > 0.0 && epsilon < 0.25;
        if !epsilon_ok {
            return Err(ParamError::EpsilonOutOfRange(epsilon));
        }
        let c_ok = c > 0.0;
        if !c_ok {
            return Err(ParamError::NonPositiveC(c));
        }
        Ok(TruncationParams { epsilon, c })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `(c/eps) * n * log2(n)`: the shared numerator of `tau_u` and of the
    /// sequential variant's degree cut `l_i`.
    pub fn threshold_numerator(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        (self.c / self.epsilon) * n as f64 * (n as f64).log2()
    }

    /// `tau` for a node of degree `deg`; `+inf` when `deg = 0`, so isolated
    /// nodes are always interesting.
    pub fn tau_for_degree(&self, n: usize, deg: usize) -> f64 {
        if deg == 0 {
            return f64::INFINITY;
        }
        self.threshold_numerator(n) / deg as f64
    }

    /// Degree cut `l_i = (c/eps) * n * log2(n) / i` applied at iteration `i`
    /// of the sequential variant.
    pub fn degree_cut(&self, n: usize, iteration: u32) -> f64 {
        self.threshold_numerator(n) / iteration as f64
    }

    /// True when node rank `pi_u` makes the node uninteresting
    /// (`pi_u >= tau_u`, the strict form of the threshold comparison).
    pub fn is_uninteresting(&self, n: usize, deg: usize, rank: u32) -> bool {
        rank as f64 >= self.tau_for_degree(n, deg)
    }

    /// Bucket size `theta_0 = ceil((4c/eps) * log2(n))` for the adaptive
    /// streaming variant's degree classes.
    pub fn theta0(&self, n: usize) -> u64 {
        if n <= 1 {
            return 1;
        }
        ((4.0 * self.c / self.epsilon) * (n as f64).log2()).ceil() as u64
    }
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams {
            epsilon: DEFAULT_EPSILON,
            c: DEFAULT_C,
        }
    }
}

/// `tau_u` evaluated against a graph's (final) degree for node `u`.
pub fn tau(graph: &SignedGraph, params: &TruncationParams, u: u32) -> f64 {
    params.tau_for_degree(graph.n(), graph.degree(u))
}

/// Parameters that leave every node interesting on any graph with `n`
/// nodes: `tau_u >= n^2/deg > n` for all `u`. Used by tests and the CLI to
/// recover classic pivot from the truncated variants.
pub fn no_truncation_params(n: usize, epsilon: f64) -> TruncationParams {
    let c = if n <= 2 {
        DEFAULT_C
    } else {
        (epsilon * n as f64 / (n as f64).log2()).max(DEFAULT_C)
    };
    TruncationParams::new(epsilon, c).expect("valid by construction")
}
