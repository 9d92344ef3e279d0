//! Correlation clustering on complete signed graphs via truncated pivot.
//!
//! The crate provides:
//!
//! * [`graph`]: the positive-edge graph representation and disagreement
//!   counting (negative edges stay implicit).
//! * [`oracle`]: brute-force optimum, bad-triangle enumeration and the
//!   disjoint-triangle packing lower bound.
//! * [`pivot`]: classic pivot plus the parallel and sequential truncated
//!   variants and singleton-edge diagnostics.
//! * [`stream`] / [`adversary`]: single-pass streaming implementations with
//!   per-event memory accounting and stream-order adversaries.
//! * [`mpc`]: a round-by-round simulator of the linear-space MPC protocol
//!   with word-level memory audits.
//! * [`gen`]: seeded graph generators for experiments.

pub mod adversary;
pub mod gen;
pub mod graph;
pub mod mpc;
pub mod oracle;
pub mod params;
pub mod perm;
pub mod pivot;
pub mod stream;

pub use graph::{disagreements, Clustering, GraphError, SignedGraph};
pub use mpc::{measure_gstore, mpc_truncated_pivot, MpcRunReport, MpcTopology};
pub use oracle::{brute_force_opt, enumerate_bad_triangles, triangle_packing_lower_bound, BadTriangle};
pub use params::{tau, TruncationParams};
pub use perm::Permutation;
pub use pivot::{
    classic_pivot, classify_singleton_edges, truncated_pivot_parallel,
    truncated_pivot_sequential, PivotOutcome,
};
pub use stream::{
    stream_adaptive, stream_fixed_permutation, EdgeSource, MemoryTrace, StreamEvent,
    StreamOutcome, TraceConfig,
};
