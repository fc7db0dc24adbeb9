//! End-to-end run orchestration: iterate cost analysis, engine selection,
//! task combination, priority ordering and simulated execution until the
//! frontier drains or residuals fall below the threshold.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algo::{Algo, AlgorithmState, PageRankParams, UNREACHED};
use crate::cost::{compute_activity, CostModelConfig};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::io;
use crate::partition::{hub_scores, partition_chunked, DEFAULT_PARTITION_BYTES};
use crate::plan::{build_plan, forced_choices, select_engines, EngineChoice, TransferPlan};
use crate::schedule::{prioritize, PriorityMode, PriorityPolicy};
use crate::sim::{run_iteration, IterationMetrics, SimParams, DEFAULT_STREAMS};

pub const DEFAULT_MAX_ITERS: u32 = 10_000;

/// Engine assignment policy for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    /// Cost-based per-partition selection.
    Hybrid,
    Filter,
    Compaction,
    ZeroCopy,
}

impl EngineMode {
    pub fn name(self) -> &'static str {
        match self {
            EngineMode::Hybrid => "hybrid",
            EngineMode::Filter => "filter",
            EngineMode::Compaction => "compaction",
            EngineMode::ZeroCopy => "zerocopy",
        }
    }
}

impl std::str::FromStr for EngineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hybrid" => Ok(EngineMode::Hybrid),
            "filter" => Ok(EngineMode::Filter),
            "compaction" => Ok(EngineMode::Compaction),
            "zerocopy" | "zero-copy" => Ok(EngineMode::ZeroCopy),
            other => Err(Error::Config(format!("unknown engine mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub algo: Algo,
    pub source: u32,
    pub engine: EngineMode,
    pub policy: PriorityPolicy,
    pub partition_bytes: u64,
    pub max_iters: u32,
    pub pagerank: PageRankParams,
    pub streams: usize,
    pub cost: CostModelConfig,
    /// When false, `cost.d1` is derived from the algorithm (id bytes, plus
    /// weight bytes when the kernels read weights).
    pub d1_explicit: bool,
    /// Append one JSON line per iteration describing the transfer plan.
    pub dump_plan: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(algo: Algo) -> Self {
        RunOptions {
            algo,
            source: 0,
            engine: EngineMode::Hybrid,
            policy: PriorityPolicy::default(),
            partition_bytes: DEFAULT_PARTITION_BYTES,
            max_iters: DEFAULT_MAX_ITERS,
            pagerank: PageRankParams::default(),
            streams: DEFAULT_STREAMS,
            cost: CostModelConfig::default(),
            d1_explicit: false,
            dump_plan: None,
        }
    }
}

/// Run-level aggregates; written alongside the metrics CSV as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algo: String,
    pub engine: String,
    pub priority: String,
    pub num_vertices: u32,
    pub num_edges: u64,
    pub partitions: usize,
    pub partition_bytes: u64,
    pub d1: u64,
    pub iterations: u32,
    pub converged: bool,
    pub bytes_filter: u64,
    pub bytes_compaction_payload: u64,
    pub bytes_zerocopy_lines: u64,
    pub total_transfer_bytes: u64,
    pub tlps_total: u64,
    /// Edge-array bytes of the whole graph at this run's `d1`.
    pub edge_volume_bytes: u64,
    /// Total transfer bytes over edge volume.
    pub transfer_ratio: f64,
    pub total_makespan: f64,
    pub total_cpu_compact_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<IterationMetrics>,
    pub summary: RunSummary,
}

fn priority_name(policy: &PriorityPolicy) -> &'static str {
    match policy.mode {
        PriorityMode::None => "none",
        PriorityMode::HubDriven => "hub",
        PriorityMode::DeltaDriven => "delta",
    }
}

/// Execute the configured algorithm on `g` and report per-iteration
/// transfer and scheduling metrics.
pub fn run(g: &CsrGraph, opts: &RunOptions) -> Result<(RunReport, AlgorithmState)> {
    opts.cost.validate()?;
    if opts.streams == 0 {
        return Err(Error::Config("stream count must be positive".into()));
    }

    // Shortest paths need weights; synthesize the deterministic rule when
    // the input carries none.
    let owned;
    let g = if opts.algo.uses_weights() && !g.is_weighted() {
        owned = g.with_synthesized_weights();
        &owned
    } else {
        g
    };

    let mut cost = opts.cost.clone();
    if !opts.d1_explicit {
        cost.d1 = CsrGraph::ID_BYTES
            + if opts.algo.uses_weights() { CsrGraph::WEIGHT_BYTES } else { 0 };
    }

    let mut state = AlgorithmState::new(opts.algo, g, opts.source, opts.pagerank)?;
    opts.policy.validate(&state)?;
    let hub = match opts.policy.mode {
        PriorityMode::HubDriven => Some(hub_scores(&g.degree_stats())),
        _ => None,
    };
    let table = partition_chunked(g, opts.partition_bytes);
    let params = SimParams { streams: opts.streams, policy: opts.policy };

    let mut plan_sink = match &opts.dump_plan {
        Some(path) => {
            Some(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
        }
        None => None,
    };

    let mut frontier = state.initial_frontier(g, opts.source);
    let mut rows: Vec<IterationMetrics> = Vec::new();
    let mut converged = false;
    while (rows.len() as u32) < opts.max_iters {
        if frontier.is_empty() || state.values_converged() {
            converged = true;
            break;
        }
        let activities = compute_activity(g, &table, &frontier, &cost);
        let choices = match opts.engine {
            EngineMode::Hybrid => select_engines(&activities, &cost),
            EngineMode::Filter => forced_choices(&activities, EngineChoice::Filter),
            EngineMode::Compaction => forced_choices(&activities, EngineChoice::Compaction),
            EngineMode::ZeroCopy => forced_choices(&activities, EngineChoice::ZeroCopy),
        };
        let mut plan = build_plan(&choices, &activities, &table, &cost)?;
        prioritize(&mut plan, &table, &frontier, &state, hub.as_deref(), &opts.policy)?;
        if let Some(sink) = plan_sink.as_mut() {
            dump_plan_line(sink, frontier.iteration + 1, &plan, opts.dump_plan.as_deref())?;
        }
        let (next, metrics) =
            run_iteration(g, &table, &plan, &activities, &frontier, &mut state, &cost, &params)?;
        rows.push(metrics);
        frontier = next;
    }
    if frontier.is_empty() || state.values_converged() {
        converged = true;
    }
    if let Some(mut sink) = plan_sink {
        sink.flush().map_err(|e| Error::io(opts.dump_plan.clone().unwrap(), e))?;
    }

    let edge_volume_bytes = g.num_edges() * cost.d1;
    let total_transfer_bytes: u64 = rows.iter().map(|r| r.transfer_bytes()).sum();
    let summary = RunSummary {
        algo: opts.algo.name().to_string(),
        engine: opts.engine.name().to_string(),
        priority: priority_name(&opts.policy).to_string(),
        num_vertices: g.num_vertices(),
        num_edges: g.num_edges(),
        partitions: table.len(),
        partition_bytes: opts.partition_bytes,
        d1: cost.d1,
        iterations: rows.len() as u32,
        converged,
        bytes_filter: rows.iter().map(|r| r.bytes_filter).sum(),
        bytes_compaction_payload: rows.iter().map(|r| r.bytes_compaction_payload).sum(),
        bytes_zerocopy_lines: rows.iter().map(|r| r.bytes_zerocopy_lines).sum(),
        total_transfer_bytes,
        tlps_total: rows.iter().map(|r| r.tlps_total).sum(),
        edge_volume_bytes,
        transfer_ratio: if edge_volume_bytes == 0 {
            0.0
        } else {
            total_transfer_bytes as f64 / edge_volume_bytes as f64
        },
        total_makespan: rows.iter().map(|r| r.makespan).sum(),
        total_cpu_compact_time: rows.iter().map(|r| r.cpu_compact_time).sum(),
    };
    Ok((RunReport { rows, summary }, state))
}

#[derive(Serialize)]
struct PlanDump<'a> {
    iteration: u32,
    #[serde(flatten)]
    plan: &'a TransferPlan,
}

fn dump_plan_line(
    sink: &mut impl Write,
    iteration: u32,
    plan: &TransferPlan,
    path: Option<&Path>,
) -> Result<()> {
    let line = serde_json::to_string(&PlanDump { iteration, plan })
        .map_err(|e| Error::Config(format!("plan serialization failed: {e}")))?;
    writeln!(sink, "{line}")
        .map_err(|e| Error::io(path.unwrap_or_else(|| Path::new("plan dump")), e))
}

pub const CSV_HEADER: &str = "iteration,active_vertices,active_edges,filter_partitions,\
compaction_partitions,zerocopy_partitions,bytes_filter,bytes_compaction_payload,\
bytes_zerocopy_lines,tlps_total,cpu_compact_time,makespan";

pub fn metrics_csv(rows: &[IterationMetrics]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.iteration,
            r.active_vertices,
            r.active_edges,
            r.filter_partitions,
            r.compaction_partitions,
            r.zerocopy_partitions,
            r.bytes_filter,
            r.bytes_compaction_payload,
            r.bytes_zerocopy_lines,
            r.tlps_total,
            r.cpu_compact_time,
            r.makespan,
        ));
    }
    out
}

/// Write the per-iteration CSV plus a `<path>.summary.json` sidecar.
pub fn write_metrics(path: &Path, report: &RunReport) -> Result<()> {
    std::fs::write(path, metrics_csv(&report.rows)).map_err(|e| Error::io(path, e))?;
    let sidecar = summary_path(path);
    let json = serde_json::to_string_pretty(&report.summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    std::fs::write(&sidecar, json).map_err(|e| Error::io(sidecar, e))
}

pub fn summary_path(csv_path: &Path) -> PathBuf {
    let mut os = csv_path.as_os_str().to_owned();
    os.push(".summary.json");
    PathBuf::from(os)
}

/// Dump the final value array as a little-endian binary sidecar.
pub fn write_result_binary(state: &AlgorithmState, path: &Path) -> Result<()> {
    match state {
        AlgorithmState::Sssp { dist } => io::write_u64_array(path, dist),
        AlgorithmState::Bfs { level } => io::write_u64_array(path, level),
        AlgorithmState::Cc { label } => io::write_u32_array(path, label),
        AlgorithmState::PageRank { rank, .. } => io::write_f64_array(path, rank),
    }
}

/// Dump the final value array as text, one value per line.
pub fn write_result_text(state: &AlgorithmState, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let io_err = |e: std::io::Error| Error::io(path, e);
    match state {
        AlgorithmState::Sssp { dist } | AlgorithmState::Bfs { level: dist } => {
            for &v in dist {
                if v == UNREACHED {
                    writeln!(w, "inf").map_err(io_err)?;
                } else {
                    writeln!(w, "{v}").map_err(io_err)?;
                }
            }
        }
        AlgorithmState::Cc { label } => {
            for &l in label {
                writeln!(w, "{l}").map_err(io_err)?;
            }
        }
        AlgorithmState::PageRank { rank, .. } => {
            for &r in rank {
                writeln!(w, "{r}").map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmat::{rmat_generate, RmatParams};

    fn small_graph() -> CsrGraph {
        let edges = rmat_generate(200, 1200, 11, RmatParams::default()).unwrap();
        CsrGraph::from_edges(200, &edges, None).unwrap()
    }

    #[test]
    fn forced_engines_agree_on_final_values() {
        let g = small_graph();
        let mut results = Vec::new();
        for engine in
            [EngineMode::Hybrid, EngineMode::Filter, EngineMode::Compaction, EngineMode::ZeroCopy]
        {
            let mut opts = RunOptions::new(Algo::Sssp);
            opts.engine = engine;
            opts.partition_bytes = 512;
            let (report, state) = run(&g, &opts).unwrap();
            assert!(report.summary.converged);
            results.push(state);
        }
        for r in &results[1..] {
            assert_eq!(&results[0], r);
        }
    }

    #[test]
    fn summary_totals_match_row_sums() {
        let g = small_graph();
        let mut opts = RunOptions::new(Algo::Bfs);
        opts.partition_bytes = 256;
        let (report, _) = run(&g, &opts).unwrap();
        let bytes: u64 = report.rows.iter().map(|r| r.transfer_bytes()).sum();
        assert_eq!(report.summary.total_transfer_bytes, bytes);
        assert_eq!(report.summary.iterations as usize, report.rows.len());
        let tlps: u64 = report.rows.iter().map(|r| r.tlps_total).sum();
        assert_eq!(report.summary.tlps_total, tlps);
    }

    #[test]
    fn empty_graph_exits_cleanly() {
        let g = CsrGraph::from_edges(0, &[], None).unwrap();
        let (report, _) = run(&g, &RunOptions::new(Algo::Sssp)).unwrap();
        assert_eq!(report.summary.iterations, 0);
        assert!(report.summary.converged);
        assert_eq!(report.summary.transfer_ratio, 0.0);
    }

    #[test]
    fn csv_has_stable_schema() {
        let g = small_graph();
        let mut opts = RunOptions::new(Algo::Bfs);
        opts.partition_bytes = 1024;
        let (report, _) = run(&g, &opts).unwrap();
        let csv = metrics_csv(&report.rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 12);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 12);
        assert!(first.starts_with("1,"));
    }

    #[test]
    fn d1_follows_the_algorithm() {
        let g = small_graph();
        let (report, _) = run(&g, &RunOptions::new(Algo::Sssp)).unwrap();
        assert_eq!(report.summary.d1, 8);
        let (report, _) = run(&g, &RunOptions::new(Algo::Bfs)).unwrap();
        assert_eq!(report.summary.d1, 4);
        let mut opts = RunOptions::new(Algo::Sssp);
        opts.cost.d1 = 16;
        opts.d1_explicit = true;
        let (report, _) = run(&g, &opts).unwrap();
        assert_eq!(report.summary.d1, 16);
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let g = small_graph();
        let mut opts = RunOptions::new(Algo::PageRank);
        opts.partition_bytes = 512;
        let (r1, s1) = run(&g, &opts).unwrap();
        let (r2, s2) = run(&g, &opts).unwrap();
        assert_eq!(metrics_csv(&r1.rows), metrics_csv(&r2.rows));
        assert_eq!(s1, s2);
    }
}
