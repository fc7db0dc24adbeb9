//! CSR graph representation and degree statistics.
//!
//! Vertex ids are dense `0..num_vertices` and stored as `u32`. Edge offsets
//! are `u64` so that edge counts are not limited by the id width. Edge
//! weights are optional and, when present, parallel the neighbor array.

use crate::error::{Error, Result};

/// Compressed sparse row graph.
///
/// `offsets` has length `num_vertices + 1`, is non-decreasing, starts at 0
/// and ends at `num_edges`. The out-neighbors of `v` live in
/// `neighbors[offsets[v]..offsets[v + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    offsets: Vec<u64>,
    neighbors: Vec<u32>,
    weights: Option<Vec<u32>>,
}

/// In/out degree arrays plus their maxima.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeStats {
    pub in_degree: Vec<u32>,
    pub out_degree: Vec<u32>,
    pub d_imax: u32,
    pub d_omax: u32,
}

impl CsrGraph {
    /// Bytes occupied by one neighbor id.
    pub const ID_BYTES: u64 = 4;
    /// Bytes occupied by one edge weight.
    pub const WEIGHT_BYTES: u64 = 4;

    /// Build a CSR graph from an edge list over dense ids.
    ///
    /// Edges keep their input order within each source vertex; duplicate
    /// edges and self-loops are preserved.
    pub fn from_edges(
        num_vertices: u32,
        edges: &[(u32, u32)],
        weights: Option<&[u32]>,
    ) -> Result<Self> {
        if let Some(w) = weights {
            if w.len() != edges.len() {
                return Err(Error::InvalidGraph(format!(
                    "weights length {} != edge count {}",
                    w.len(),
                    edges.len()
                )));
            }
        }
        let n = num_vertices as usize;
        let mut offsets = vec![0u64; n + 1];
        for &(src, dst) in edges {
            if src >= num_vertices || dst >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({src}, {dst}) out of range for {num_vertices} vertices"
                )));
            }
            offsets[src as usize + 1] += 1;
        }
        for i in 1..=n {
            offsets[i] += offsets[i - 1];
        }
        let mut cursor: Vec<u64> = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; edges.len()];
        let mut out_weights = weights.map(|_| vec![0u32; edges.len()]);
        for (e, &(src, dst)) in edges.iter().enumerate() {
            let pos = cursor[src as usize] as usize;
            cursor[src as usize] += 1;
            neighbors[pos] = dst;
            if let (Some(ow), Some(w)) = (out_weights.as_mut(), weights) {
                ow[pos] = w[e];
            }
        }
        Ok(CsrGraph { offsets, neighbors, weights: out_weights })
    }

    /// Assemble a graph from raw CSR arrays, validating the invariants.
    pub fn from_parts(
        offsets: Vec<u64>,
        neighbors: Vec<u32>,
        weights: Option<Vec<u32>>,
    ) -> Result<Self> {
        let g = CsrGraph { offsets, neighbors, weights };
        g.validate()?;
        Ok(g)
    }

    pub fn num_vertices(&self) -> u32 {
        (self.offsets.len() - 1) as u32
    }

    pub fn num_edges(&self) -> u64 {
        self.neighbors.len() as u64
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn out_degree(&self, v: u32) -> u32 {
        (self.offsets[v as usize + 1] - self.offsets[v as usize]) as u32
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let lo = self.offsets[v as usize] as usize;
        let hi = self.offsets[v as usize + 1] as usize;
        &self.neighbors[lo..hi]
    }

    pub fn neighbor_slice(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn weights(&self) -> Option<&[u32]> {
        self.weights.as_deref()
    }

    /// Weights of `v`'s out-edges, parallel to `neighbors(v)`.
    pub fn edge_weights(&self, v: u32) -> Option<&[u32]> {
        self.weights.as_deref().map(|w| {
            let lo = self.offsets[v as usize] as usize;
            let hi = self.offsets[v as usize + 1] as usize;
            &w[lo..hi]
        })
    }

    /// Bytes one edge occupies in the host edge arrays (id plus weight when
    /// the graph carries weights). Used for partition sizing.
    pub fn edge_entry_bytes(&self) -> u64 {
        if self.weights.is_some() {
            Self::ID_BYTES + Self::WEIGHT_BYTES
        } else {
            Self::ID_BYTES
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.offsets.is_empty() {
            return Err(Error::InvalidGraph("offsets must have length >= 1".into()));
        }
        if self.offsets[0] != 0 {
            return Err(Error::InvalidGraph("offsets[0] must be 0".into()));
        }
        let n = self.offsets.len() - 1;
        for i in 0..n {
            if self.offsets[i] > self.offsets[i + 1] {
                return Err(Error::InvalidGraph(format!("offsets not non-decreasing at {i}")));
            }
        }
        if self.offsets[n] != self.neighbors.len() as u64 {
            return Err(Error::InvalidGraph(format!(
                "offsets[{}] = {} but neighbor array has {} entries",
                n,
                self.offsets[n],
                self.neighbors.len()
            )));
        }
        let nv = n as u32;
        if let Some(&bad) = self.neighbors.iter().find(|&&w| w >= nv) {
            return Err(Error::InvalidGraph(format!(
                "neighbor id {bad} out of range for {nv} vertices"
            )));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.neighbors.len() {
                return Err(Error::InvalidGraph(format!(
                    "weight array length {} != edge count {}",
                    w.len(),
                    self.neighbors.len()
                )));
            }
        }
        Ok(())
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let n = self.num_vertices() as usize;
        let mut in_degree = vec![0u32; n];
        let mut out_degree = vec![0u32; n];
        for v in 0..n as u32 {
            out_degree[v as usize] = self.out_degree(v);
        }
        for &w in &self.neighbors {
            in_degree[w as usize] += 1;
        }
        DegreeStats {
            d_imax: in_degree.iter().copied().max().unwrap_or(0),
            d_omax: out_degree.iter().copied().max().unwrap_or(0),
            in_degree,
            out_degree,
        }
    }

    /// Graph with each edge also stored in the reverse direction.
    /// Self-loops are doubled like every other edge.
    pub fn symmetrized(&self) -> CsrGraph {
        let mut edges = Vec::with_capacity(self.neighbors.len() * 2);
        let mut weights = self.weights.as_ref().map(|_| Vec::with_capacity(self.neighbors.len() * 2));
        for v in 0..self.num_vertices() {
            let ws = self.edge_weights(v);
            for (i, &w) in self.neighbors(v).iter().enumerate() {
                edges.push((v, w));
                edges.push((w, v));
                if let (Some(acc), Some(ws)) = (weights.as_mut(), ws) {
                    acc.push(ws[i]);
                    acc.push(ws[i]);
                }
            }
        }
        CsrGraph::from_edges(self.num_vertices(), &edges, weights.as_deref())
            .expect("symmetrization preserves validity")
    }

    /// Attach deterministic weights `(src + dst) % 64 + 1` to an unweighted
    /// graph; a weighted graph is returned unchanged.
    pub fn with_synthesized_weights(&self) -> CsrGraph {
        if self.weights.is_some() {
            return self.clone();
        }
        let mut weights = Vec::with_capacity(self.neighbors.len());
        for v in 0..self.num_vertices() {
            for &w in self.neighbors(v) {
                weights.push((v as u64 + w as u64) as u32 % 64 + 1);
            }
        }
        CsrGraph {
            offsets: self.offsets.clone(),
            neighbors: self.neighbors.clone(),
            weights: Some(weights),
        }
    }

    /// Relabel vertices through `perm` (old id -> new id). Neighbor lists
    /// keep their per-source order; weights follow their edges.
    pub fn relabel(&self, perm: &[u32]) -> Result<CsrGraph> {
        let n = self.num_vertices() as usize;
        if perm.len() != n {
            return Err(Error::InvalidGraph(format!(
                "permutation length {} != vertex count {n}",
                perm.len()
            )));
        }
        // order[new] = old
        let mut order = vec![u32::MAX; n];
        for (old, &new) in perm.iter().enumerate() {
            if new as usize >= n || order[new as usize] != u32::MAX {
                return Err(Error::InvalidGraph("perm is not a permutation".into()));
            }
            order[new as usize] = old as u32;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u64);
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        let mut weights = self.weights.as_ref().map(|_| Vec::with_capacity(self.neighbors.len()));
        for &old in &order {
            let ws = self.edge_weights(old);
            for (i, &w) in self.neighbors(old).iter().enumerate() {
                neighbors.push(perm[w as usize]);
                if let (Some(acc), Some(ws)) = (weights.as_mut(), ws) {
                    acc.push(ws[i]);
                }
            }
            offsets.push(neighbors.len() as u64);
        }
        Ok(CsrGraph { offsets, neighbors, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_edge_chain() {
        let g = CsrGraph::from_edges(3, &[(0, 1), (1, 2)], None).unwrap();
        assert_eq!(g.offsets(), &[0, 1, 2, 2]);
        assert_eq!(g.neighbor_slice(), &[1, 2]);
        g.validate().unwrap();
    }

    #[test]
    fn chain_degree_stats() {
        let g = CsrGraph::from_edges(3, &[(0, 1), (1, 2)], None).unwrap();
        let s = g.degree_stats();
        assert_eq!(s.out_degree, vec![1, 1, 0]);
        assert_eq!(s.in_degree, vec![0, 1, 1]);
        assert_eq!(s.d_omax, 1);
        assert_eq!(s.d_imax, 1);
    }

    #[test]
    fn star_degree_stats() {
        let edges: Vec<(u32, u32)> = (1..9).map(|i| (0, i)).collect();
        let g = CsrGraph::from_edges(9, &edges, None).unwrap();
        let s = g.degree_stats();
        assert_eq!(s.out_degree[0], 8);
        assert_eq!(s.d_omax, 8);
        assert_eq!(s.d_imax, 1);
    }

    #[test]
    fn degree_sums_match_brute_force_edge_count() {
        // Oracle: count edges straight off the edge list.
        let edges = vec![(0u32, 1u32), (0, 1), (1, 1), (3, 0), (2, 3), (3, 3)];
        let g = CsrGraph::from_edges(4, &edges, None).unwrap();
        let s = g.degree_stats();
        let total: u64 = edges.len() as u64;
        assert_eq!(s.out_degree.iter().map(|&d| d as u64).sum::<u64>(), total);
        assert_eq!(s.in_degree.iter().map(|&d| d as u64).sum::<u64>(), total);
    }

    #[test]
    fn duplicate_edges_and_self_loops_preserved() {
        let g = CsrGraph::from_edges(2, &[(0, 1), (0, 1), (1, 1)], None).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.neighbors(0), &[1, 1]);
        assert_eq!(g.neighbors(1), &[1]);
    }

    #[test]
    fn synthesized_weights_rule() {
        let g = CsrGraph::from_edges(3, &[(0, 1), (1, 2)], None).unwrap();
        let w = g.with_synthesized_weights();
        assert_eq!(w.weights().unwrap(), &[(0 + 1) % 64 + 1, (1 + 2) % 64 + 1]);
        // Already-weighted graphs pass through untouched.
        let again = w.with_synthesized_weights();
        assert_eq!(again, w);
    }

    #[test]
    fn relabel_roundtrip_identity() {
        let g = CsrGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)], None).unwrap();
        let id: Vec<u32> = (0..3).collect();
        assert_eq!(g.relabel(&id).unwrap(), g);
    }

    #[test]
    fn relabel_preserves_edge_multiset() {
        let g = CsrGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 1)], None).unwrap();
        let perm = vec![2u32, 0, 3, 1];
        let h = g.relabel(&perm).unwrap();
        let mut orig: Vec<(u32, u32)> = Vec::new();
        for v in 0..g.num_vertices() {
            for &w in g.neighbors(v) {
                orig.push((perm[v as usize], perm[w as usize]));
            }
        }
        let mut new: Vec<(u32, u32)> = Vec::new();
        for v in 0..h.num_vertices() {
            for &w in h.neighbors(v) {
                new.push((v, w));
            }
        }
        orig.sort_unstable();
        new.sort_unstable();
        assert_eq!(orig, new);
    }

    #[test]
    fn invalid_neighbor_rejected() {
        assert!(CsrGraph::from_edges(2, &[(0, 2)], None).is_err());
        assert!(CsrGraph::from_parts(vec![0, 1], vec![5], None).is_err());
    }

    #[test]
    fn empty_graph_is_valid() {
        let g = CsrGraph::from_edges(0, &[], None).unwrap();
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
        g.validate().unwrap();
    }
}
