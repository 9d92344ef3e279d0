//! Signed-graph representation and disagreement counting.
//!
//! A graph stores only its positive edges; every non-adjacent pair is an
//! implicit negative edge. Disagreement costs are computed from cluster
//! sizes and internal positive-edge counts so the negative edge set is
//! never materialized.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node id {id} out of range for n = {n}")]
    NodeOutOfRange { id: u32, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("edge ({0}, {1}) not in sorted orientation (expected u < v)")]
    UnsortedEdge(u32, u32),
    #[error("clustering covers {got} nodes, graph has {expected}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("malformed graph file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Complete signed graph over nodes `0..n`, identified with its positive
/// edge set. Adjacency lists are sorted and symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    pos_adj: Vec<Vec<u32>>,
    m: usize,
}

impl SignedGraph {
    /// Graph with `n` nodes and no positive edges.
    pub fn empty(n: usize) -> Self {
        SignedGraph {
            n,
            pos_adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from undirected edges, validating ids, self-loops and
    /// duplicates. Edges may be given in either orientation.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut g = SignedGraph::empty(n);
        for &(u, v) in edges {
            g.check_pair(u, v)?;
            g.pos_adj[u as usize].push(v);
            g.pos_adj[v as usize].push(u);
        }
        for (u, adj) in g.pos_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if adj.windows(2).any(|w| w[0] == w[1]) {
                let dup = adj.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
                return Err(GraphError::DuplicateEdge(u as u32, dup));
            }
        }
        g.m = edges.len();
        Ok(g)
    }

    /// Builds from adjacency lists already known to be sorted, symmetric and
    /// loop-free. Used by the generators, which construct edges in order.
    pub(crate) fn from_adj_unchecked(pos_adj: Vec<Vec<u32>>) -> Self {
        let m = pos_adj.iter().map(Vec::len).sum::<usize>() / 2;
        debug_assert!(pos_adj
            .iter()
            .all(|a| a.windows(2).all(|w| w[0] < w[1])));
        SignedGraph {
            n: pos_adj.len(),
            pos_adj,
            m,
        }
    }

    fn check_pair(&self, u: u32, v: u32) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for id in [u, v] {
            if id as usize >= self.n {
                return Err(GraphError::NodeOutOfRange { id, n: self.n });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of positive edges.
    pub fn num_edges(&self) -> usize {
        self.m
    }

    pub fn degree(&self, u: u32) -> usize {
        self.pos_adj[u as usize].len()
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.pos_adj[u as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.pos_adj[u as usize].binary_search(&v).is_ok()
    }

    /// Iterates positive edges once each, in `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.pos_adj.iter().enumerate().flat_map(|(u, adj)| {
            let u = u as u32;
            adj.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Parses the text format: first line `n m`, then `m` lines `u v` with
    /// `u < v`, ids 0-based, each edge once.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate();
        let (n, m) = match lines.next() {
            Some((_, header)) => parse_header(header)?,
            None => {
                return Err(GraphError::Malformed {
                    line: 1,
                    reason: "empty file".into(),
                })
            }
        };
        let mut g = SignedGraph::empty(n);
        let mut count = 0usize;
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (u, v) = parse_pair(line, idx + 1)?;
            if u >= v {
                if u == v {
                    return Err(GraphError::SelfLoop(u));
                }
                return Err(GraphError::UnsortedEdge(u, v));
            }
            g.check_pair(u, v)?;
            if g.has_edge(u, v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            // Insert keeping lists sorted; fine for file-sized inputs.
            let pos = g.pos_adj[u as usize].binary_search(&v).unwrap_err();
            g.pos_adj[u as usize].insert(pos, v);
            let pos = g.pos_adj[v as usize].binary_search(&u).unwrap_err();
            g.pos_adj[v as usize].insert(pos, u);
            count += 1;
        }
        if count != m {
            return Err(GraphError::Malformed {
                line: 1,
                reason: format!("header declares {m} edges, file has {count}"),
            });
        }
        g.m = count;
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.m);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn read_file(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_text()).map_err(|e| GraphError::Io(e.to_string()))
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), GraphError> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<usize, GraphError> {
        tok.and_then(|t| t.parse().ok()).ok_or(GraphError::Malformed {
            line: 1,
            reason: format!("expected `n m`, got {line:?}"),
        })
    };
    let n = parse(it.next())?;
    let m = parse(it.next())?;
    Ok((n, m))
}

fn parse_pair(line: &str, lineno: usize) -> Result<(u32, u32), GraphError> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<u32, GraphError> {
        tok.and_then(|t| t.parse().ok()).ok_or(GraphError::Malformed {
            line: lineno,
            reason: format!("expected `u v`, got {line:?}"),
        })
    };
    let u = parse(it.next())?;
    let v = parse(it.next())?;
    Ok((u, v))
}

/// Partition of the node set. `assignment[u]` is the cluster id of node `u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    assignment: Vec<u32>,
}

impl Clustering {
    pub fn from_assignment(assignment: Vec<u32>) -> Self {
        Clustering { assignment }
    }

    /// Every node in its own cluster.
    pub fn singletons(n: usize) -> Self {
        Clustering {
            assignment: (0..n as u32).collect(),
        }
    }

    /// All nodes in one cluster.
    pub fn single_cluster(n: usize) -> Self {
        Clustering {
            assignment: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_of(&self, u: u32) -> u32 {
        self.assignment[u as usize]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Relabels cluster ids to a dense `0..k` range in order of first
    /// appearance, so equal partitions compare equal.
    pub fn canonicalize(&self) -> Clustering {
        let mut remap: Vec<Option<u32>> = vec![None; self.assignment.len()];
        let mut next = 0u32;
        let mut out = Vec::with_capacity(self.assignment.len());
        for &c in &self.assignment {
            let slot = &mut remap[c as usize];
            let id = match slot {
                Some(id) => *id,
                None => {
                    let id = next;
                    *slot = Some(id);
                    next += 1;
                    id
                }
            };
            out.push(id);
        }
        Clustering { assignment: out }
    }

    pub fn num_clusters(&self) -> usize {
        let mut seen = vec![false; self.assignment.len()];
        let mut k = 0;
        for &c in &self.assignment {
            if !seen[c as usize] {
                seen[c as usize] = true;
                k += 1;
            }
        }
        k
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let canon = self.canonicalize();
        let mut sizes = vec![0usize; canon.num_clusters()];
        for &c in &canon.assignment {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

/// Number of disagreements: positive edges cut between clusters plus
/// implicit negative pairs placed inside a cluster. For a cluster of size
/// `s` with `k` internal positive edges the negative part is
/// `s(s-1)/2 - k`.
pub fn disagreements(graph: &SignedGraph, clustering: &Clustering) -> Result<u64, GraphError> {
    if clustering.len() != graph.n() {
        return Err(GraphError::SizeMismatch {
            got: clustering.len(),
            expected: graph.n(),
        });
    }
    let mut cut = 0u64;
    // Sparse per-cluster tallies; cluster ids need not be dense here.
    let mut size: Vec<u64> = vec![0; graph.n().max(1)];
    let mut internal: Vec<u64> = vec![0; graph.n().max(1)];
    let assign = clustering.assignment();
    for &c in assign {
        size[c as usize] += 1;
    }
    for (u, v) in graph.edges() {
        if assign[u as usize] == assign[v as usize] {
            internal[assign[u as usize] as usize] += 1;
        } else {
            cut += 1;
        }
    }
    let mut inside = 0u64;
    for (&s, &k) in size.iter().zip(internal.iter()) {
        if s > 1 {
            inside += s * (s - 1) / 2 - k;
        }
    }
    Ok(cut + inside)
}
