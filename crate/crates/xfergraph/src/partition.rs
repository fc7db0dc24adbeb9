//! Vertex reordering and edge-balanced partitioning.
//!
//! Hub sorting gathers the highest-scoring vertices at the front of the id
//! space so that hub-dense partitions can be prioritized later; chunked
//! partitioning sweeps the reordered graph into contiguous vertex ranges
//! whose edge arrays fit a byte budget.

use crate::error::{Error, Result};
use crate::graph::{CsrGraph, DegreeStats};

/// Fraction of vertices gathered to the front by default.
pub const DEFAULT_HUB_FRACTION: f64 = 0.08;
/// Default partition byte budget (32 MiB).
pub const DEFAULT_PARTITION_BYTES: u64 = 32 * 1024 * 1024;

/// Contiguous, disjoint vertex ranges covering `[0, num_vertices)` with
/// per-partition edge and byte totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTable {
    /// `(start, end)` vertex ranges, end exclusive.
    pub ranges: Vec<(u32, u32)>,
    pub edge_counts: Vec<u64>,
    pub byte_counts: Vec<u64>,
    pub target_bytes: u64,
}

impl PartitionTable {
    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Partition index owning `v`.
    pub fn partition_of(&self, v: u32) -> usize {
        debug_assert!(!self.ranges.is_empty());
        match self.ranges.binary_search_by(|&(s, e)| {
            if v < s {
                std::cmp::Ordering::Greater
            } else if v >= e {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(i) => i,
            Err(_) => unreachable!("ranges tile the vertex space"),
        }
    }
}

/// Combined-degree importance score per vertex:
/// `out_degree(v) * in_degree(v) / (max_out * max_in)`, in `[0, 1]`.
pub fn hub_scores(stats: &DegreeStats) -> Vec<f64> {
    let denom = stats.d_omax as f64 * stats.d_imax as f64;
    stats
        .out_degree
        .iter()
        .zip(&stats.in_degree)
        .map(|(&o, &i)| {
            if denom == 0.0 {
                0.0
            } else {
                (o as f64 * i as f64) / denom
            }
        })
        .collect()
}

/// Relabel the graph so the `ceil(hub_fraction * n)` highest-scoring
/// vertices occupy ids `0..h` in descending score order (ties by ascending
/// original id); the remaining vertices keep their natural order. Returns
/// the relabeled graph and the old-to-new id permutation.
pub fn hub_sort(
    g: &CsrGraph,
    stats: &DegreeStats,
    hub_fraction: f64,
) -> Result<(CsrGraph, Vec<u32>)> {
    if !(0.0..=1.0).contains(&hub_fraction) {
        return Err(Error::Config(format!("hub fraction {hub_fraction} not in [0, 1]")));
    }
    let n = g.num_vertices() as usize;
    let scores = hub_scores(stats);
    let h = ((hub_fraction * n as f64).ceil() as usize).min(n);

    let mut by_score: Vec<u32> = (0..n as u32).collect();
    by_score.sort_by(|&a, &b| {
        scores[b as usize]
            .partial_cmp(&scores[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut is_hub = vec![false; n];
    for &v in &by_score[..h] {
        is_hub[v as usize] = true;
    }
    // order[new] = old: hubs first by descending score, then the rest in
    // ascending original id.
    let mut order: Vec<u32> = by_score[..h].to_vec();
    order.extend((0..n as u32).filter(|&v| !is_hub[v as usize]));

    let mut perm = vec![0u32; n];
    for (new, &old) in order.iter().enumerate() {
        perm[old as usize] = new as u32;
    }
    let relabeled = g.relabel(&perm)?;
    Ok((relabeled, perm))
}

/// Greedy sweep over vertices in id order: a partition closes when adding
/// the next vertex would push its edge-array bytes past `target_bytes`,
/// unless the partition is still empty (a single oversized vertex gets a
/// partition of its own).
pub fn partition_chunked(g: &CsrGraph, target_bytes: u64) -> PartitionTable {
    assert!(target_bytes > 0, "target_bytes must be positive");
    let n = g.num_vertices();
    let d1 = g.edge_entry_bytes();
    let mut table = PartitionTable {
        ranges: Vec::new(),
        edge_counts: Vec::new(),
        byte_counts: Vec::new(),
        target_bytes,
    };
    if n == 0 {
        return table;
    }
    let mut start = 0u32;
    let mut edges = 0u64;
    for v in 0..n {
        let deg = g.out_degree(v) as u64;
        let vertex_bytes = deg * d1;
        if v > start && (edges * d1).saturating_add(vertex_bytes) > target_bytes {
            table.ranges.push((start, v));
            table.edge_counts.push(edges);
            table.byte_counts.push(edges * d1);
            start = v;
            edges = 0;
        }
        edges += deg;
    }
    table.ranges.push((start, n));
    table.edge_counts.push(edges);
    table.byte_counts.push(edges * d1);
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: u32) -> CsrGraph {
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|v| (v, v + 1)).collect();
        CsrGraph::from_edges(n, &edges, None).unwrap()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let g = chain(5);
        let stats = g.degree_stats();
        let (h, perm) = hub_sort(&g, &stats, 0.0).unwrap();
        assert_eq!(perm, vec![0, 1, 2, 3, 4]);
        assert_eq!(h, g);
    }

    #[test]
    fn reciprocal_star_keeps_center_first() {
        // 0 <-> {1..8}: vertex 0 has the unique maximal score 1.0.
        let mut edges: Vec<(u32, u32)> = (1..9).map(|i| (0, i)).collect();
        edges.extend((1..9).map(|i| (i, 0)));
        let g = CsrGraph::from_edges(9, &edges, None).unwrap();
        let stats = g.degree_stats();

        // Brute-force oracle over the score formula.
        let scores = hub_scores(&stats);
        let best = (0..9)
            .max_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap())
            .unwrap();
        assert_eq!(best, 0);
        assert_eq!(scores[0], 1.0);

        let (_, perm) = hub_sort(&g, &stats, 1.0 / 9.0).unwrap();
        assert_eq!(perm[0], 0);
        // Everyone else keeps natural order behind the hub.
        assert_eq!(perm, vec![0, 1, 2, 3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let edges = vec![(0u32, 1u32), (1, 2), (2, 0), (0, 2), (2, 2)];
        let g = CsrGraph::from_edges(3, &edges, None).unwrap();
        for s in hub_scores(&g.degree_stats()) {
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn hub_sort_is_isomorphic() {
        let edges = vec![(0u32, 1u32), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (2, 0), (1, 1)];
        let g = CsrGraph::from_edges(5, &edges, None).unwrap();
        let stats = g.degree_stats();
        let (h, perm) = hub_sort(&g, &stats, 0.4).unwrap();
        assert_eq!(h.num_edges(), g.num_edges());
        let mut orig: Vec<(u32, u32)> =
            edges.iter().map(|&(u, v)| (perm[u as usize], perm[v as usize])).collect();
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
    fn chain_splits_into_equal_chunks() {
        // 6 edges at 4 bytes each, 12-byte budget: two 3-edge partitions.
        let g = chain(7);
        let t = partition_chunked(&g, 12);
        assert_eq!(t.ranges, vec![(0, 3), (3, 7)]);
        assert_eq!(t.edge_counts, vec![3, 3]);
        assert_eq!(t.byte_counts, vec![12, 12]);
    }

    #[test]
    fn oversized_vertex_gets_own_partition() {
        let edges: Vec<(u32, u32)> = (1..11).map(|i| (0, i % 11)).collect();
        let g = CsrGraph::from_edges(11, &edges, None).unwrap();
        let t = partition_chunked(&g, 4);
        assert_eq!(t.ranges[0], (0, 1));
        assert_eq!(t.edge_counts[0], 10);
        assert!(t.byte_counts[0] > t.target_bytes);
    }

    #[test]
    fn partitions_tile_and_sum() {
        let edges = vec![(0u32, 1u32), (1, 2), (1, 3), (3, 0), (3, 1), (3, 2), (4, 4)];
        let g = CsrGraph::from_edges(5, &edges, None).unwrap();
        for target in [4u64, 8, 12, 1024] {
            let t = partition_chunked(&g, target);
            assert_eq!(t.ranges[0].0, 0);
            assert_eq!(t.ranges.last().unwrap().1, g.num_vertices());
            for w in t.ranges.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
            assert_eq!(t.edge_counts.iter().sum::<u64>(), g.num_edges());
            for (i, &(s, e)) in t.ranges.iter().enumerate() {
                let expect: u64 = (s..e).map(|v| g.out_degree(v) as u64).sum();
                assert_eq!(t.edge_counts[i], expect);
                assert!(t.byte_counts[i] <= target || e - s == 1);
                assert_eq!(t.partition_of(s), i);
                assert_eq!(t.partition_of(e - 1), i);
            }
            // Same input, same table.
            assert_eq!(partition_chunked(&g, target), t);
        }
    }

    #[test]
    fn empty_graph_yields_empty_table() {
        let g = CsrGraph::from_edges(0, &[], None).unwrap();
        let t = partition_chunked(&g, 64);
        assert!(t.is_empty());
    }

    #[test]
    fn defaults_match_documented_values() {
        assert_eq!(DEFAULT_HUB_FRACTION, 0.08);
        assert_eq!(DEFAULT_PARTITION_BYTES, 33_554_432);
    }
}
