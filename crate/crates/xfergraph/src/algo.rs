//! Push-based vertex programs: shortest paths, BFS levels, connected
//! component labels, and residual-accumulation PageRank.
//!
//! Each program is an edge function plus a commutative-associative merge;
//! the execution layer decides which vertices push and when. Component
//! labels assume a symmetrized adjacency.

use crate::error::{Error, Result};
use crate::frontier::FrontierState;
use crate::graph::CsrGraph;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Sentinel for unreachable vertices.
pub const UNREACHED: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Sssp,
    Bfs,
    Cc,
    PageRank,
}

impl Algo {
    /// Whether kernels dereference edge weights (affects transfer bytes).
    pub fn uses_weights(self) -> bool {
        matches!(self, Algo::Sssp)
    }

    /// Whether the per-vertex value is an accumulating residual.
    pub fn is_accumulative(self) -> bool {
        matches!(self, Algo::PageRank)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algo::Sssp => "sssp",
            Algo::Bfs => "bfs",
            Algo::Cc => "cc",
            Algo::PageRank => "pr",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sssp" => Ok(Algo::Sssp),
            "bfs" => Ok(Algo::Bfs),
            "cc" => Ok(Algo::Cc),
            "pr" | "pagerank" => Ok(Algo::PageRank),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    pub epsilon: f64,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams { damping: DEFAULT_DAMPING, epsilon: DEFAULT_EPSILON }
    }
}

/// Candidate distance pushed along a weighted edge; merge is `min`.
pub fn sssp_edge(u_dist: u64, weight: u32) -> u64 {
    u_dist.saturating_add(weight as u64)
}

/// Candidate level pushed along an edge; merge is `min`.
pub fn bfs_edge(u_level: u64) -> u64 {
    u_level.saturating_add(1)
}

/// Label pushed along an edge; merge is `min`.
pub fn cc_edge(u_label: u32) -> u32 {
    u_label
}

/// Residual share pushed along one out-edge; merge is `+`.
pub fn pagerank_delta_edge(u_delta: f64, out_degree: u32, damping: f64) -> f64 {
    damping * u_delta / out_degree as f64
}

/// Per-vertex values of the running algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmState {
    Sssp { dist: Vec<u64> },
    Bfs { level: Vec<u64> },
    Cc { label: Vec<u32> },
    PageRank { rank: Vec<f64>, delta: Vec<f64>, params: PageRankParams },
}

impl AlgorithmState {
    pub fn new(algo: Algo, g: &CsrGraph, source: u32, pr: PageRankParams) -> Result<Self> {
        let n = g.num_vertices() as usize;
        match algo {
            Algo::Sssp | Algo::Bfs => {
                if n > 0 && source as usize >= n {
                    return Err(Error::Config(format!(
                        "source {source} out of range for {n} vertices"
                    )));
                }
                if algo == Algo::Sssp && !g.is_weighted() {
                    return Err(Error::Config(
                        "shortest paths need edge weights; synthesize them first".into(),
                    ));
                }
                let mut values = vec![UNREACHED; n];
                if n > 0 {
                    values[source as usize] = 0;
                }
                Ok(match algo {
                    Algo::Sssp => AlgorithmState::Sssp { dist: values },
                    _ => AlgorithmState::Bfs { level: values },
                })
            }
            Algo::Cc => Ok(AlgorithmState::Cc { label: (0..n as u32).collect() }),
            Algo::PageRank => {
                if !(0.0 < pr.damping && pr.damping < 1.0) {
                    return Err(Error::Config(format!("damping {} not in (0, 1)", pr.damping)));
                }
                if pr.epsilon <= 0.0 {
                    return Err(Error::Config(format!("epsilon {} must be positive", pr.epsilon)));
                }
                Ok(AlgorithmState::PageRank {
                    rank: vec![0.0; n],
                    delta: vec![1.0 - pr.damping; n],
                    params: pr,
                })
            }
        }
    }

    pub fn algo(&self) -> Algo {
        match self {
            AlgorithmState::Sssp { .. } => Algo::Sssp,
            AlgorithmState::Bfs { .. } => Algo::Bfs,
            AlgorithmState::Cc { .. } => Algo::Cc,
            AlgorithmState::PageRank { .. } => Algo::PageRank,
        }
    }

    /// Vertices active at iteration one: the source for traversals, every
    /// vertex for label propagation and residual accumulation.
    pub fn initial_frontier(&self, g: &CsrGraph, source: u32) -> FrontierState {
        let n = g.num_vertices();
        match self {
            AlgorithmState::Sssp { .. } | AlgorithmState::Bfs { .. } => {
                if n == 0 {
                    FrontierState::empty(0)
                } else {
                    FrontierState::from_vertices(n, [source])
                }
            }
            AlgorithmState::Cc { .. } | AlgorithmState::PageRank { .. } => FrontierState::all(n),
        }
    }

    /// Push `v`'s value over its out-edges, merging into this state.
    /// Source-side reads come from `snapshot` when given (synchronous
    /// rounds) and from `self` otherwise. `mark` is called for every vertex
    /// whose value changed.
    pub fn process_vertex(
        &mut self,
        g: &CsrGraph,
        v: u32,
        snapshot: Option<&AlgorithmState>,
        mark: &mut dyn FnMut(u32),
    ) {
        self.process_edges(v, g.neighbors(v), g.edge_weights(v), snapshot, mark)
    }

    /// Same as [`process_vertex`](Self::process_vertex) but over an
    /// explicit edge slice, e.g. a compacted copy of `v`'s neighbor list.
    /// The slice must hold all of `v`'s out-edges.
    pub fn process_edges(
        &mut self,
        v: u32,
        neighbors: &[u32],
        weights: Option<&[u32]>,
        snapshot: Option<&AlgorithmState>,
        mark: &mut dyn FnMut(u32),
    ) {
        let vi = v as usize;
        match self {
            AlgorithmState::Sssp { dist } => {
                let base = match snapshot {
                    Some(AlgorithmState::Sssp { dist: old }) => old[vi],
                    None => dist[vi],
                    Some(_) => unreachable!("snapshot variant mismatch"),
                };
                if base == UNREACHED {
                    return;
                }
                let weights = weights.expect("sssp requires weights");
                for (i, &w) in neighbors.iter().enumerate() {
                    let cand = sssp_edge(base, weights[i]);
                    if cand < dist[w as usize] {
                        dist[w as usize] = cand;
                        mark(w);
                    }
                }
            }
            AlgorithmState::Bfs { level } => {
                let base = match snapshot {
                    Some(AlgorithmState::Bfs { level: old }) => old[vi],
                    None => level[vi],
                    Some(_) => unreachable!("snapshot variant mismatch"),
                };
                if base == UNREACHED {
                    return;
                }
                let cand = bfs_edge(base);
                for &w in neighbors {
                    if cand < level[w as usize] {
                        level[w as usize] = cand;
                        mark(w);
                    }
                }
            }
            AlgorithmState::Cc { label } => {
                let base = match snapshot {
                    Some(AlgorithmState::Cc { label: old }) => old[vi],
                    None => label[vi],
                    Some(_) => unreachable!("snapshot variant mismatch"),
                };
                let cand = cc_edge(base);
                for &w in neighbors {
                    if cand < label[w as usize] {
                        label[w as usize] = cand;
                        mark(w);
                    }
                }
            }
            AlgorithmState::PageRank { rank, delta, params } => {
                let d = match snapshot {
                    Some(AlgorithmState::PageRank { delta: old, .. }) => old[vi],
                    None => delta[vi],
                    Some(_) => unreachable!("snapshot variant mismatch"),
                };
                if d <= 0.0 {
                    return;
                }
                // Absorb the residual, then scatter the damped share.
                rank[vi] += d;
                delta[vi] -= d;
                if neighbors.is_empty() {
                    return;
                }
                let share = pagerank_delta_edge(d, neighbors.len() as u32, params.damping);
                if share == 0.0 {
                    return;
                }
                for &w in neighbors {
                    delta[w as usize] += share;
                    mark(w);
                }
            }
        }
    }

    /// Largest pending residual (0 for non-accumulative programs).
    pub fn max_delta(&self) -> f64 {
        match self {
            AlgorithmState::PageRank { delta, .. } => delta.iter().copied().fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// Value-based convergence: residuals all below epsilon. Traversal and
    /// label programs converge only by frontier exhaustion.
    pub fn values_converged(&self) -> bool {
        match self {
            AlgorithmState::PageRank { params, .. } => self.max_delta() < params.epsilon,
            _ => false,
        }
    }
}
