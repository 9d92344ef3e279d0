//! Single-pass streaming implementations with exact slot-level memory
//! accounting.
//!
//! Two variants share the storage machinery:
//!
//! * fixed permutation: ranks are drawn before the stream; a node deletes
//!   its stored edges the moment its running degree certifies
//!   `pi_u >= tau_u`.
//! * adaptive: ranks are revealed bit-by-bit through fair coin flips at
//!   degree-class boundaries, so an adaptive edge order cannot target the
//!   nodes that are about to be deleted.
//!
//! Both consume the stream exactly once; the clustering is reconstructed
//! from stored edges and running degrees only, never from the original
//! graph.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Clustering;
use crate::params::TruncationParams;
use crate::perm::Permutation;
use crate::pivot::PivotOutcome;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("event {index}: node id {id} out of range for n = {n}")]
    NodeOutOfRange { index: usize, id: u32, n: usize },
    #[error("event {index}: self-loop on node {node}")]
    SelfLoop { index: usize, node: u32 },
    #[error("event {index}: duplicate edge ({u}, {v})")]
    DuplicateEdge { index: usize, u: u32, v: u32 },
    #[error("event indices must be consecutive from 1; got {got} at position {expected}")]
    BadEventIndex { expected: usize, got: usize },
    #[error("rank_bits_factor must be positive")]
    ZeroRankFactor,
    #[error("rank strings of {bits} bits exceed the supported 120")]
    RankBitsTooLong { bits: u32 },
    #[error("malformed stream file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// One positive edge arriving at a 1-based stream position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamEvent {
    pub edge: (u32, u32),
    pub index: usize,
}

/// Attaches consecutive 1-based indices to an edge order.
pub fn to_events<I>(order: I) -> impl Iterator<Item = StreamEvent>
where
    I: IntoIterator<Item = (u32, u32)>,
{
    order
        .into_iter()
        .enumerate()
        .map(|(i, edge)| StreamEvent { edge, index: i + 1 })
}

/// What a stream-order adversary may observe between events: per-node
/// interesting status and running degrees. Coin outcomes and partial ranks
/// stay hidden.
#[derive(Clone, Copy)]
pub struct PublicState<'a> {
    interesting: &'a [bool],
    degrees: &'a [u32],
}

impl<'a> PublicState<'a> {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_interesting(&self, u: u32) -> bool {
        self.interesting[u as usize]
    }

    pub fn degree(&self, u: u32) -> u32 {
        self.degrees[u as usize]
    }
}

/// Turn-by-turn edge supplier for the adaptive variant. The runner calls
/// `next_edge` once per event; the source sees only the public state.
pub trait EdgeSource {
    fn next_edge(&mut self, public: PublicState<'_>) -> Option<(u32, u32)>;
}

impl<S: EdgeSource + ?Sized> EdgeSource for Box<S> {
    fn next_edge(&mut self, public: PublicState<'_>) -> Option<(u32, u32)> {
        (**self).next_edge(public)
    }
}

/// Replays a fixed edge order, ignoring the public state.
pub struct FixedOrderSource {
    order: Vec<(u32, u32)>,
    cursor: usize,
}

impl FixedOrderSource {
    pub fn new(order: Vec<(u32, u32)>) -> Self {
        FixedOrderSource { order, cursor: 0 }
    }
}

impl EdgeSource for FixedOrderSource {
    fn next_edge(&mut self, _public: PublicState<'_>) -> Option<(u32, u32)> {
        let e = self.order.get(self.cursor).copied();
        self.cursor += 1;
        e
    }
}

/// Controls how much the memory trace records. Full per-event counts cost
/// one u32 per stream event; peak-only runs keep just the scalars.
#[derive(Debug, Clone, Default)]
pub struct TraceConfig {
    pub peak_only: bool,
    /// Sorted 1-based event indices at which the runner recounts stored
    /// slots from scratch and records both numbers.
    pub audit_events: Vec<usize>,
}

impl TraceConfig {
    pub fn peak_only() -> Self {
        TraceConfig {
            peak_only: true,
            audit_events: Vec::new(),
        }
    }

    pub fn with_audits(mut self, mut events: Vec<usize>) -> Self {
        events.sort_unstable();
        self.audit_events = events;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeletionEvent {
    pub node: u32,
    pub event_index: usize,
    pub freed_slots: usize,
}

/// Independent recount of stored slots against the running counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotAudit {
    pub event_index: usize,
    pub counter: usize,
    pub recount: usize,
}

/// Slot counts over the stream. An edge occupies one slot per interesting
/// endpoint at arrival time, so an edge between two interesting nodes
/// counts twice; deleting a node frees all slots held on its behalf.
#[derive(Debug, Clone, Default)]
pub struct MemoryTrace {
    pub per_event: Option<Vec<u32>>,
    pub peak_slots: usize,
    pub final_slots: usize,
    pub events: usize,
    pub deletions: Vec<DeletionEvent>,
    pub audits: Vec<SlotAudit>,
}

/// Result of a streaming run: the clustering outcome, the permutation that
/// drove it (derived from coin flips in the adaptive variant), tails
/// bookkeeping and the memory trace.
#[derive(Debug, Clone)]
pub struct StreamOutcome {
    pub outcome: PivotOutcome,
    pub permutation: Permutation,
    /// Nodes that flipped a 1 during the stream (adaptive variant).
    pub tails: Vec<bool>,
    /// Tails nodes whose completed rank ended up interesting: the
    /// containment V^tails ⊆ V^un failed for them. Surfaced, not fatal.
    pub tails_violations: Vec<u32>,
    /// Exact rank collisions resolved by node id.
    pub rank_tie_breaks: usize,
    pub trace: MemoryTrace,
}

/// Per-node edge storage plus the incremental slot counter and trace.
struct SlotStore {
    stored: Vec<Vec<u32>>,
    count: usize,
    trace: MemoryTrace,
    audit_cursor: usize,
    audit_events: Vec<usize>,
    record_per_event: bool,
}

impl SlotStore {
    fn new(n: usize, cfg: TraceConfig) -> Self {
        SlotStore {
            stored: vec![Vec::new(); n],
            count: 0,
            trace: MemoryTrace {
                per_event: if cfg.peak_only { None } else { Some(Vec::new()) },
                ..MemoryTrace::default()
            },
            audit_cursor: 0,
            audit_events: cfg.audit_events,
            record_per_event: !cfg.peak_only,
        }
    }

    fn add(&mut self, owner: u32, neighbor: u32) {
        self.stored[owner as usize].push(neighbor);
        self.count += 1;
    }

    fn delete_node(&mut self, node: u32, event_index: usize) {
        let freed = self.stored[node as usize].len();
        self.stored[node as usize].clear();
        self.count -= freed;
        self.trace.deletions.push(DeletionEvent {
            node,
            event_index,
            freed_slots: freed,
        });
    }

    fn end_event(&mut self, event_index: usize) {
        self.trace.events = event_index;
        self.trace.peak_slots = self.trace.peak_slots.max(self.count);
        if self.record_per_event {
            self.trace
                .per_event
                .as_mut()
                .expect("per-event trace enabled")
                .push(self.count as u32);
        }
        while self.audit_cursor < self.audit_events.len()
            && self.audit_events[self.audit_cursor] == event_index
        {
            let recount = self.stored.iter().map(Vec::len).sum();
            self.trace.audits.push(SlotAudit {
                event_index,
                counter: self.count,
                recount,
            });
            self.audit_cursor += 1;
        }
    }

    fn finish(mut self) -> (Vec<Vec<u32>>, MemoryTrace) {
        self.trace.final_slots = self.count;
        (self.stored, self.trace)
    }
}

/// Duplicate-edge detector: dense bitset for small `n`, hash set beyond.
enum SeenEdges {
    Bits { n: usize, bits: Vec<u64> },
    Set(HashSet<(u32, u32)>),
}

impl SeenEdges {
    fn new(n: usize) -> Self {
        if n <= 1 << 14 {
            SeenEdges::Bits {
                n,
                bits: vec![0u64; (n * n).div_ceil(64)],
            }
        } else {
            SeenEdges::Set(HashSet::new())
        }
    }

    /// Returns true if the pair was already present.
    fn insert(&mut self, u: u32, v: u32) -> bool {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        match self {
            SeenEdges::Bits { n, bits } => {
                let idx = a as usize * *n + b as usize;
                let (word, bit) = (idx / 64, idx % 64);
                let was = bits[word] >> bit & 1 == 1;
                bits[word] |= 1 << bit;
                was
            }
            SeenEdges::Set(set) => !set.insert((a, b)),
        }
    }
}

fn validate_edge(
    index: usize,
    (u, v): (u32, u32),
    n: usize,
    seen: &mut SeenEdges,
) -> Result<(), StreamError> {
    if u == v {
        return Err(StreamError::SelfLoop { index, node: u });
    }
    for id in [u, v] {
        if id as usize >= n {
            return Err(StreamError::NodeOutOfRange { index, id, n });
        }
    }
    if seen.insert(u, v) {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        return Err(StreamError::DuplicateEdge { index, u: a, v: b });
    }
    Ok(())
}

/// Single-pass run with a permutation fixed before the stream. Stores each
/// arriving edge once per currently-interesting endpoint; when a node's
/// running degree first makes `pi_u >= tau_u`, its slots are deleted
/// (degree tracking continues). After the stream the greedy MIS and the
/// cluster assignment run on stored edges with final-degree taus; the
/// result equals the in-memory parallel variant on the full graph.
pub fn stream_fixed_permutation<I>(
    stream: I,
    n: usize,
    perm: &Permutation,
    params: &TruncationParams,
    trace_cfg: TraceConfig,
) -> Result<StreamOutcome, StreamError>
where
    I: IntoIterator<Item = StreamEvent>,
{
    assert_eq!(perm.len(), n, "permutation covers the stream's nodes");
    let numerator = params.threshold_numerator(n);
    let mut store = SlotStore::new(n, trace_cfg);
    let mut seen = SeenEdges::new(n);
    let mut degree = vec![0u32; n];
    let mut interesting = vec![true; n];

    for (expected_index, event) in (1usize..).zip(stream) {
        if event.index != expected_index {
            return Err(StreamError::BadEventIndex {
                expected: expected_index,
                got: event.index,
            });
        }
        let (u, v) = event.edge;
        validate_edge(event.index, (u, v), n, &mut seen)?;
        degree[u as usize] += 1;
        degree[v as usize] += 1;
        for w in [u, v] {
            let wi = w as usize;
            if interesting[wi] && (perm.rank(w) as f64) >= numerator / degree[wi] as f64 {
                interesting[wi] = false;
                store.delete_node(w, event.index);
            }
        }
        if interesting[u as usize] {
            store.add(u, v);
        }
        if interesting[v as usize] {
            store.add(v, u);
        }
        store.end_event(event.index);
    }

    let (stored, trace) = store.finish();
    let outcome = cluster_from_store(n, perm, &degree, &interesting, &stored, numerator);
    Ok(StreamOutcome {
        outcome,
        permutation: perm.clone(),
        tails: vec![false; n],
        tails_violations: Vec::new(),
        rank_tie_breaks: 0,
        trace,
    })
}

/// Smaller-memory adaptive variant. Degree classes start at
/// `theta_0 = ceil((4c/eps) log2 n)` and double; crossing a class boundary
/// appends a fair coin flip to the node's rank prefix, and a 1 sends the
/// node to V^tails (slots deleted, degree tracking continues). After the
/// stream every rank is completed to `a * ceil(log2 n)` bits with fresh
/// fair bits, the resulting permutation defines V^un = {v : pi_v >= tau_v},
/// and clustering proceeds as in the fixed-permutation variant.
pub fn stream_adaptive(
    source: &mut dyn EdgeSource,
    n: usize,
    params: &TruncationParams,
    rank_bits_factor: u32,
    seed: u64,
    trace_cfg: TraceConfig,
) -> Result<StreamOutcome, StreamError> {
    if rank_bits_factor == 0 {
        return Err(StreamError::ZeroRankFactor);
    }
    let total_bits = rank_bits_factor * ceil_log2(n);
    if total_bits > 120 {
        return Err(StreamError::RankBitsTooLong { bits: total_bits });
    }
    let theta0 = params.theta0(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = SlotStore::new(n, trace_cfg);
    let mut seen = SeenEdges::new(n);
    let mut degree = vec![0u32; n];
    let mut live = vec![true; n]; // not in V^tails
    let mut class_boundary = vec![theta0; n]; // top of the current class
    let mut rank_prefix = vec![0u128; n];
    let mut rank_len = vec![0u32; n];
    let mut index = 0usize;

    loop {
        let next = source.next_edge(PublicState {
            interesting: &live,
            degrees: &degree,
        });
        let Some((u, v)) = next else { break };
        index += 1;
        validate_edge(index, (u, v), n, &mut seen)?;
        for w in [u, v] {
            let wi = w as usize;
            degree[wi] += 1;
            if u64::from(degree[wi]) > class_boundary[wi] {
                class_boundary[wi] *= 2;
                // The coin is flipped after the edge arrived; the adversary
                // never sees it coming.
                let tails: bool = rng.random();
                rank_len[wi] += 1;
                debug_assert!(rank_len[wi] <= total_bits);
                rank_prefix[wi] = (rank_prefix[wi] << 1) | u128::from(tails);
                if tails && live[wi] {
                    live[wi] = false;
                    store.delete_node(w, index);
                }
            }
        }
        if live[u as usize] {
            store.add(u, v);
        }
        if live[v as usize] {
            store.add(v, u);
        }
        store.end_event(index);
    }

    // Complete each rank to the full bit length with fresh fair bits.
    let mut rank_value = vec![0u128; n];
    for w in 0..n {
        let remaining = total_bits - rank_len[w];
        rank_value[w] = (rank_prefix[w] << remaining) | random_bits(&mut rng, remaining);
    }

    // Rank order, exact ties broken by node id (each break is counted).
    let mut by_rank: Vec<u32> = (0..n as u32).collect();
    by_rank.sort_unstable_by_key(|&u| (rank_value[u as usize], u));
    let rank_tie_breaks = by_rank
        .windows(2)
        .filter(|w| rank_value[w[0] as usize] == rank_value[w[1] as usize])
        .count();
    let perm = Permutation::from_order(&by_rank).expect("by_rank is a permutation");

    let numerator = params.threshold_numerator(n);
    let mut tails_violations = Vec::new();
    let mut interesting = vec![false; n];
    for w in 0..n {
        let un =
            degree[w] > 0 && (perm.rank(w as u32) as f64) >= numerator / degree[w] as f64;
        if !live[w] && !un {
            // Rank completion landed a tails node below its tau: the
            // containment V^tails ⊆ V^un failed. Its edges are already
            // deleted, so it stays excluded; the event is surfaced.
            tails_violations.push(w as u32);
        }
        interesting[w] = live[w] && !un;
    }

    let (stored, trace) = store.finish();
    let outcome = cluster_from_store(n, &perm, &degree, &interesting, &stored, numerator);
    Ok(StreamOutcome {
        outcome,
        permutation: perm,
        tails: live.iter().map(|&l| !l).collect(),
        tails_violations,
        rank_tie_breaks,
        trace,
    })
}

/// Post-stream clustering shared by both variants (and by the MPC leader,
/// which faces the same reconstruction problem): greedy MIS over the
/// stored subgraph induced by interesting nodes, then each node joins its
/// smallest-rank pivot neighbor `v` when `pi_v < tau_u` (final degrees).
pub(crate) fn cluster_from_store(
    n: usize,
    perm: &Permutation,
    degree: &[u32],
    interesting: &[bool],
    stored: &[Vec<u32>],
    numerator: f64,
) -> PivotOutcome {
    let tau = |u: usize| -> f64 {
        if degree[u] == 0 {
            f64::INFINITY
        } else {
            numerator / degree[u] as f64
        }
    };

    let order = perm.order();
    let mut is_pivot = vec![false; n];
    let mut killed = vec![false; n];
    for &u in &order {
        let ui = u as usize;
        if interesting[ui] && !killed[ui] {
            is_pivot[ui] = true;
            for &w in &stored[ui] {
                if interesting[w as usize] {
                    killed[w as usize] = true;
                }
            }
        }
    }

    // Pivots are interesting, so each stores its full adjacency: visiting
    // pivots in rank order assigns every node its smallest-rank pivot
    // neighbor.
    let mut best_pivot = vec![u32::MAX; n];
    for &u in &order {
        let ui = u as usize;
        if !is_pivot[ui] {
            continue;
        }
        for &w in &stored[ui] {
            if best_pivot[w as usize] == u32::MAX {
                best_pivot[w as usize] = u;
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
        let v = best_pivot[u];
        if v != u32::MAX && (perm.rank(v) as f64) < tau(u) {
            rep[u] = v;
        } else {
            rep[u] = u as u32;
            is_singleton[u] = true;
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

fn random_bits(rng: &mut ChaCha8Rng, bits: u32) -> u128 {
    if bits == 0 {
        return 0;
    }
    let raw = (u128::from(rng.random::<u64>()) << 64) | u128::from(rng.random::<u64>());
    raw & ((1u128 << bits) - 1)
}

/// Smallest `k` with `2^k >= n`; 0 for `n <= 1`.
pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n as u64 - 1).leading_zeros()
    }
}

/// Writes a stream file: header `n m`, then one `u v` line per event in
/// stream order.
pub fn write_stream_file(path: &Path, n: usize, order: &[(u32, u32)]) -> Result<(), StreamError> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", n, order.len());
    for &(u, v) in order {
        let _ = writeln!(out, "{u} {v}");
    }
    std::fs::write(path, out).map_err(|e| StreamError::Io(e.to_string()))
}

/// Reads a stream file back as `(n, order)`, validating ids and duplicates.
pub fn read_stream_file(path: &Path) -> Result<(usize, Vec<(u32, u32)>), StreamError> {
    let text = std::fs::read_to_string(path).map_err(|e| StreamError::Io(e.to_string()))?;
    parse_stream(&text)
}

pub fn parse_stream(text: &str) -> Result<(usize, Vec<(u32, u32)>), StreamError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(StreamError::Malformed {
        line: 1,
        reason: "empty file".into(),
    })?;
    let mut head = header.split_whitespace();
    let mut read_num = |what: &str| -> Result<usize, StreamError> {
        head.next()
            .and_then(|t| t.parse().ok())
            .ok_or(StreamError::Malformed {
                line: 1,
                reason: format!("missing {what} in header {header:?}"),
            })
    };
    let n = read_num("n")?;
    let m = read_num("m")?;
    let mut order = Vec::with_capacity(m);
    let mut seen = SeenEdges::new(n);
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut num = || -> Result<u32, StreamError> {
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or(StreamError::Malformed {
                    line: idx + 1,
                    reason: format!("expected `u v`, got {line:?}"),
                })
        };
        let u = num()?;
        let v = num()?;
        validate_edge(order.len() + 1, (u, v), n, &mut seen)?;
        order.push((u, v));
    }
    if order.len() != m {
        return Err(StreamError::Malformed {
            line: 1,
            reason: format!("header declares {m} events, file has {}", order.len()),
        });
    }
    Ok((n, order))
}
