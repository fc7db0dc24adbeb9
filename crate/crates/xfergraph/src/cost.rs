//! Per-partition transfer cost model.
//!
//! Costs are expressed in abstract time units: one `rtt` per saturated bus
//! packet (TLP) carrying up to `max_requests` outstanding memory requests
//! of `m` bytes each. The filter engine prices whole partitions, the
//! compaction engine prices the active payload plus an index array, and the
//! zero-copy engine prices per-vertex line requests at a damped round-trip
//! time that reflects unsaturated payloads.
//!
//! Engine comparisons are performed on rtt-free quantities, so the absolute
//! value of `rtt` scales reported costs but can never change a selection.

use std::path::Path;

use crate::error::{Error, Result};
use crate::frontier::FrontierState;
use crate::graph::CsrGraph;
use crate::partition::PartitionTable;

/// All cost-model constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModelConfig {
    /// Bytes one edge entry occupies in transfers (id bytes, plus weight
    /// bytes when the running algorithm dereferences weights).
    pub d1: u64,
    /// Bytes per compacted-index entry.
    pub d2: u64,
    /// Bytes carried by one outstanding memory request.
    pub m: u64,
    /// Maximum outstanding requests per TLP.
    pub max_requests: u64,
    /// Abstract time per saturated TLP.
    pub rtt: f64,
    /// Damping factor for the zero-copy round-trip time.
    pub gamma: f64,
    /// Compaction is chosen only when cheaper than `alpha * Tef`.
    pub alpha: f64,
    /// ... and cheaper than `beta * Tiz`.
    pub beta: f64,
    /// Consecutive filter partitions merged into one task unit.
    pub merge_width: usize,
    /// Bytes compacted per abstract time unit by the host.
    pub compaction_throughput: f64,
    /// Edges processed per abstract time unit by a simulated kernel.
    pub kernel_throughput: f64,
}

impl Default for CostModelConfig {
    fn default() -> Self {
        CostModelConfig {
            d1: 4,
            d2: 4,
            m: 128,
            max_requests: 256,
            rtt: 1.0,
            gamma: 0.625,
            alpha: 0.8,
            beta: 0.4,
            merge_width: 4,
            // Volume of eight saturated TLPs per time unit.
            compaction_throughput: (8 * 128 * 256) as f64,
            kernel_throughput: 32768.0,
        }
    }
}

impl CostModelConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.into()))
            }
        };
        check(self.d1 > 0, "d1 must be positive")?;
        check(self.d2 > 0, "d2 must be positive")?;
        check(self.m > 0, "m must be positive")?;
        check(self.max_requests > 0, "mr must be positive")?;
        check(self.rtt > 0.0, "rtt must be positive")?;
        check(self.gamma > 0.0 && self.gamma <= 1.0, "gamma must be in (0, 1]")?;
        check(self.alpha > 0.0 && self.alpha < 1.0, "alpha must be in (0, 1)")?;
        check(self.beta > 0.0 && self.beta < 1.0, "beta must be in (0, 1)")?;
        check(self.merge_width >= 1, "k must be at least 1")?;
        check(self.compaction_throughput > 0.0, "compaction_throughput must be positive")?;
        check(self.kernel_throughput > 0.0, "kernel_throughput must be positive")?;
        Ok(())
    }

    /// Bytes per TLP.
    pub fn tlp_bytes(&self) -> u64 {
        self.m * self.max_requests
    }

    /// Apply a `key = value` override. Returns false when the key does not
    /// belong to the cost model (callers may route it elsewhere).
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<bool> {
        let bad = |k: &str, v: &str| Error::Config(format!("invalid value '{v}' for {k}"));
        match key {
            "d1" => self.d1 = value.parse().map_err(|_| bad(key, value))?,
            "d2" => self.d2 = value.parse().map_err(|_| bad(key, value))?,
            "m" => self.m = value.parse().map_err(|_| bad(key, value))?,
            "mr" => self.max_requests = value.parse().map_err(|_| bad(key, value))?,
            "rtt" => self.rtt = value.parse().map_err(|_| bad(key, value))?,
            "gamma" => self.gamma = value.parse().map_err(|_| bad(key, value))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad(key, value))?,
            "beta" => self.beta = value.parse().map_err(|_| bad(key, value))?,
            "k" => self.merge_width = value.parse().map_err(|_| bad(key, value))?,
            "compaction_throughput" => {
                self.compaction_throughput = value.parse().map_err(|_| bad(key, value))?
            }
            "kernel_throughput" => {
                self.kernel_throughput = value.parse().map_err(|_| bad(key, value))?
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Read a `key = value` file, skipping blank lines and `#` comments.
pub fn read_kv_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.into(),
            line: idx + 1,
            msg: "expected 'key = value'".into(),
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Exact per-partition frontier aggregates for one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionActivity {
    pub partition: usize,
    pub active_vertices: u64,
    /// Out-edges of the active vertices.
    pub active_edges: u64,
    /// Zero-copy memory requests: one or more aligned lines per active
    /// vertex, plus the misalignment penalty.
    pub zc_requests: u64,
    pub total_edges: u64,
}

impl PartitionActivity {
    pub fn is_active(&self) -> bool {
        self.active_edges > 0
    }

    pub fn filter_bytes(&self, cfg: &CostModelConfig) -> u64 {
        self.total_edges * cfg.d1
    }

    pub fn compaction_bytes(&self, cfg: &CostModelConfig) -> u64 {
        self.active_edges * cfg.d1 + self.active_vertices * cfg.d2
    }
}

fn ceil_div(num: u64, den: u64) -> u64 {
    debug_assert!(den > 0);
    num.div_ceil(den)
}

/// 1 when the byte span of `v`'s neighbor array touches one more aligned
/// `m`-byte line than its minimum request count implies, else 0.
pub fn alignment_penalty(g: &CsrGraph, v: u32, cfg: &CostModelConfig) -> u64 {
    let deg = g.out_degree(v) as u64;
    if deg == 0 {
        return 0;
    }
    let start = g.offsets()[v as usize] * cfg.d1;
    let len = deg * cfg.d1;
    let lines_touched = (start + len - 1) / cfg.m - start / cfg.m + 1;
    let min_requests = ceil_div(len, cfg.m);
    debug_assert!(lines_touched == min_requests || lines_touched == min_requests + 1);
    lines_touched - min_requests
}

/// Memory requests needed to fetch `v`'s neighbor span over the bus.
pub fn vertex_requests(g: &CsrGraph, v: u32, cfg: &CostModelConfig) -> u64 {
    let deg = g.out_degree(v) as u64;
    if deg == 0 {
        return 0;
    }
    ceil_div(deg * cfg.d1, cfg.m) + alignment_penalty(g, v, cfg)
}

/// TLPs needed to move `bytes` with the explicit copy engine.
pub fn bytes_to_tlps(bytes: u64, cfg: &CostModelConfig) -> u64 {
    ceil_div(bytes, cfg.tlp_bytes())
}

/// Whole-partition explicit transfer cost; independent of the frontier.
pub fn cost_filter(p: &PartitionActivity, cfg: &CostModelConfig) -> f64 {
    bytes_to_tlps(p.filter_bytes(cfg), cfg) as f64 * cfg.rtt
}

/// Compacted-payload transfer cost, optionally charging the host-side
/// compaction time. Engine selection passes `include_cpu = false`; the
/// simulated clock charges the CPU stage separately.
pub fn cost_compaction(p: &PartitionActivity, cfg: &CostModelConfig, include_cpu: bool) -> f64 {
    let bytes = p.compaction_bytes(cfg);
    if bytes == 0 {
        return 0.0;
    }
    let transfer = bytes_to_tlps(bytes, cfg) as f64 * cfg.rtt;
    if include_cpu {
        transfer + bytes as f64 / cfg.compaction_throughput
    } else {
        transfer
    }
}

/// Damped round-trip factor for zero-copy, relative to `rtt`:
/// `gamma + (1 - gamma) * active_edge_ratio`, in `[gamma, 1]`.
pub fn zc_rtt_factor(p: &PartitionActivity, cfg: &CostModelConfig) -> f64 {
    let ratio = if p.total_edges == 0 {
        0.0
    } else {
        p.active_edges as f64 / p.total_edges as f64
    };
    cfg.gamma + (1.0 - cfg.gamma) * ratio
}

/// Zero-copy round-trip time for this partition's activity.
pub fn rtt_zc(p: &PartitionActivity, cfg: &CostModelConfig) -> f64 {
    zc_rtt_factor(p, cfg) * cfg.rtt
}

/// On-demand access cost: requests batched into TLPs at the damped rtt.
pub fn cost_zero_copy(p: &PartitionActivity, cfg: &CostModelConfig) -> f64 {
    if p.zc_requests == 0 {
        return 0.0;
    }
    ceil_div(p.zc_requests, cfg.max_requests) as f64 * rtt_zc(p, cfg)
}

/// Exact aggregates for every partition under the current frontier.
pub fn compute_activity(
    g: &CsrGraph,
    table: &PartitionTable,
    frontier: &FrontierState,
    cfg: &CostModelConfig,
) -> Vec<PartitionActivity> {
    let mut out = Vec::with_capacity(table.len());
    for (i, &(start, end)) in table.ranges.iter().enumerate() {
        let mut act = PartitionActivity {
            partition: i,
            active_vertices: 0,
            active_edges: 0,
            zc_requests: 0,
            total_edges: table.edge_counts[i],
        };
        for v in frontier.active.iter_range(start, end) {
            act.active_vertices += 1;
            act.active_edges += g.out_degree(v) as u64;
            act.zc_requests += vertex_requests(g, v, cfg);
        }
        out.push(act);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition_chunked;

    fn cfg() -> CostModelConfig {
        CostModelConfig::default()
    }

    fn activity(active_vertices: u64, active_edges: u64, zc: u64, total: u64) -> PartitionActivity {
        PartitionActivity {
            partition: 0,
            active_vertices,
            active_edges,
            zc_requests: zc,
            total_edges: total,
        }
    }

    /// Graph whose vertex degrees are given in order; edge targets cycle.
    fn graph_with_degrees(degrees: &[u32]) -> CsrGraph {
        let n = degrees.len() as u32;
        let mut edges = Vec::new();
        for (v, &d) in degrees.iter().enumerate() {
            for j in 0..d {
                edges.push((v as u32, (v as u32 + 1 + j) % n));
            }
        }
        CsrGraph::from_edges(n, &edges, None).unwrap()
    }

    #[test]
    fn defaults_match_documented_values() {
        let c = cfg();
        assert_eq!(c.gamma, 0.625);
        assert_eq!(c.alpha, 0.8);
        assert_eq!(c.beta, 0.4);
        assert_eq!(c.merge_width, 4);
        assert_eq!(c.m, 128);
        assert_eq!(c.max_requests, 256);
        assert_eq!(c.d1, 4);
        assert_eq!(c.d2, 4);
        c.validate().unwrap();
    }

    #[test]
    fn aligned_degree32_span_has_no_penalty() {
        // 32 neighbors at 4 bytes start at byte 0: exactly one 128-byte line.
        let g = graph_with_degrees(&[32, 1]);
        assert_eq!(alignment_penalty(&g, 0, &cfg()), 0);
        assert_eq!(vertex_requests(&g, 0, &cfg()), 1);
    }

    #[test]
    fn misaligned_degree32_span_pays_one_extra() {
        // Vertex 1 starts at byte 64 and spans [64, 192): two lines touched.
        let g = graph_with_degrees(&[16, 32]);
        assert_eq!(g.offsets()[1] * 4, 64);
        assert_eq!(alignment_penalty(&g, 1, &cfg()), 1);
        assert_eq!(vertex_requests(&g, 1, &cfg()), 2);
    }

    #[test]
    fn zero_degree_vertex_costs_nothing() {
        let g = CsrGraph::from_edges(2, &[(1, 0)], None).unwrap();
        assert_eq!(alignment_penalty(&g, 0, &cfg()), 0);
        assert_eq!(vertex_requests(&g, 0, &cfg()), 0);
    }

    #[test]
    fn filter_cost_reference_values() {
        let c = cfg();
        // 1,000,000 edges * 4B / 128 / 256 = 122.07... -> 123 TLPs.
        assert_eq!(cost_filter(&activity(0, 0, 0, 1_000_000), &c), 123.0);
        // 8192 edges * 4B = exactly one TLP volume.
        assert_eq!(cost_filter(&activity(0, 0, 0, 8192), &c), 1.0);
        assert_eq!(cost_filter(&activity(0, 0, 0, 0), &c), 0.0);
    }

    #[test]
    fn compaction_cost_reference_values() {
        let c = cfg();
        assert_eq!(cost_compaction(&activity(0, 0, 0, 1000), &c, false), 0.0);
        // 8000 * 4 + 192 * 4 = 32768 bytes: exactly one TLP.
        assert_eq!(cost_compaction(&activity(192, 8000, 0, 10_000), &c, false), 1.0);
        // 8192 * 4 + 192 * 4 = 33536 bytes: spills into a second TLP.
        assert_eq!(cost_compaction(&activity(192, 8192, 0, 10_000), &c, false), 2.0);
        // The CPU term adds bytes / throughput on top of the transfer term.
        let with_cpu = cost_compaction(&activity(192, 8000, 0, 10_000), &c, true);
        assert_eq!(with_cpu, 1.0 + 32768.0 / c.compaction_throughput);
    }

    #[test]
    fn fully_active_compaction_exceeds_filter_by_index_tlps() {
        let c = cfg();
        // 8192 edges fill the filter TLP exactly; the index array spills.
        let p = activity(192, 8192, 0, 8192);
        assert!(cost_compaction(&p, &c, false) > cost_filter(&p, &c));
        assert_eq!(cost_compaction(&p, &c, false) - cost_filter(&p, &c), 1.0);
    }

    #[test]
    fn zero_copy_empty_and_damping() {
        let c = cfg();
        assert_eq!(cost_zero_copy(&activity(0, 0, 0, 100), &c), 0.0);
        // Ratio 0 when the partition has no edges at all.
        assert_eq!(zc_rtt_factor(&activity(0, 0, 0, 0), &c), c.gamma);
        // rtt_zc stays within [gamma * rtt, rtt].
        for (ae, te) in [(0u64, 100u64), (50, 100), (100, 100)] {
            let f = zc_rtt_factor(&activity(1, ae, 1, te), &c);
            assert!(f >= c.gamma && f <= 1.0);
        }
    }

    #[test]
    fn saturated_zero_copy_equals_filter() {
        // Every vertex has degree m/d1 = 32, aligned, and all are active:
        // one request per vertex at an undamped rtt.
        let c = cfg();
        let vertices = 600u64;
        let p = activity(vertices, vertices * 32, vertices, vertices * 32);
        assert_eq!(cost_zero_copy(&p, &c), cost_filter(&p, &c));
    }

    #[test]
    fn costs_scale_linearly_in_rtt() {
        let mut c = cfg();
        let p = activity(7, 900, 11, 5000);
        let (f1, c1, z1) =
            (cost_filter(&p, &c), cost_compaction(&p, &c, false), cost_zero_copy(&p, &c));
        c.rtt = 2.0;
        assert_eq!(cost_filter(&p, &c), 2.0 * f1);
        assert_eq!(cost_compaction(&p, &c, false), 2.0 * c1);
        assert_eq!(cost_zero_copy(&p, &c), 2.0 * z1);
    }

    #[test]
    fn activity_of_empty_frontier_is_zero() {
        let g = graph_with_degrees(&[3, 4, 5]);
        let table = partition_chunked(&g, 1024);
        let frontier = FrontierState::empty(3);
        for a in compute_activity(&g, &table, &frontier, &cfg()) {
            assert_eq!(a.active_vertices, 0);
            assert_eq!(a.active_edges, 0);
            assert_eq!(a.zc_requests, 0);
        }
    }

    #[test]
    fn single_active_vertex_span_inside_one_line() {
        // Degree 5 at 4 bytes from offset 0: one 20-byte span in one line.
        let g = graph_with_degrees(&[5, 1, 1]);
        let table = partition_chunked(&g, 1024);
        let frontier = FrontierState::from_vertices(3, [0]);
        let acts = compute_activity(&g, &table, &frontier, &cfg());
        assert_eq!(acts[0].active_vertices, 1);
        assert_eq!(acts[0].active_edges, 5);
        assert_eq!(acts[0].zc_requests, 1);
    }

    #[test]
    fn fully_active_matches_totals() {
        let g = graph_with_degrees(&[3, 0, 7, 2]);
        let table = partition_chunked(&g, 16);
        let frontier = FrontierState::all(4);
        let acts = compute_activity(&g, &table, &frontier, &cfg());
        for a in &acts {
            assert_eq!(a.active_edges, a.total_edges);
        }
        let total: u64 = acts.iter().map(|a| a.active_vertices).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn adding_an_active_vertex_is_monotone() {
        let g = graph_with_degrees(&[4, 9, 33, 2, 17, 0, 5]);
        let table = partition_chunked(&g, 1 << 20);
        let c = cfg();
        let mut frontier = FrontierState::empty(7);
        let mut prev = compute_activity(&g, &table, &frontier, &c).remove(0);
        for v in 0..7u32 {
            frontier.active.set(v);
            let next = compute_activity(&g, &table, &frontier, &c).remove(0);
            assert!(next.active_edges >= prev.active_edges);
            assert!(next.zc_requests >= prev.zc_requests);
            assert!(cost_compaction(&next, &c, false) >= cost_compaction(&prev, &c, false));
            assert!(cost_zero_copy(&next, &c) >= cost_zero_copy(&prev, &c));
            assert_eq!(cost_filter(&next, &c), cost_filter(&prev, &c));
            // Requests always cover the active bytes.
            assert!(next.zc_requests * c.m >= next.active_edges * c.d1);
            prev = next;
        }
    }

    #[test]
    fn kv_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cost.conf");
        std::fs::write(&p, "# comment\nrtt = 2.5\n gamma=0.5\nstreams = 8\n").unwrap();
        let kv = read_kv_file(&p).unwrap();
        let mut c = cfg();
        let mut leftover = Vec::new();
        for (k, v) in kv {
            if !c.apply_kv(&k, &v).unwrap() {
                leftover.push((k, v));
            }
        }
        assert_eq!(c.rtt, 2.5);
        assert_eq!(c.gamma, 0.5);
        assert_eq!(leftover, vec![("streams".into(), "8".into())]);
    }
}
