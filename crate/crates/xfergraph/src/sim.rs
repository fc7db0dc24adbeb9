//! One-iteration execution on a simulated multi-stream clock.
//!
//! An iteration has two halves. The data-flow half applies every task
//! unit's kernel in dispatch order (filter units first, then the merged
//! zero-copy and compaction units), producing the vertex updates and the
//! next frontier. The timing half replays the same tasks as stages on a
//! discrete-event clock: stages within a task run in sequence on one
//! stream, stages on the same resource serialize (one bus transfer at a
//! time, one host compaction at a time, kernels serialize on the device),
//! and stages on different resources overlap.
//!
//! Zero-copy tasks are a single fused stage holding both the bus and the
//! device for `max(transfer, kernel)`. Under asynchronous policies each
//! explicitly loaded unit is processed one extra time while resident,
//! charging kernel time but no transfer.

use crate::algo::AlgorithmState;
use crate::cost::{CostModelConfig, PartitionActivity};
use crate::error::{Error, Result};
use crate::frontier::{Bitmap, FrontierState};
use crate::graph::CsrGraph;
use crate::partition::PartitionTable;
use crate::plan::{EngineChoice, TaskUnit, TransferPlan};
use crate::schedule::PriorityPolicy;

pub const DEFAULT_STREAMS: usize = 4;

/// Exclusive resources of the simulated platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Pcie,
    Gpu,
    CpuCompactor,
}

const PCIE: u8 = 1 << 0;
const GPU: u8 = 1 << 1;
const CPU: u8 = 1 << 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Transfer,
    Kernel,
    Compact,
    /// Fused zero-copy transfer plus kernel.
    Fused,
    /// Extra kernel pass over resident data.
    Recompute,
}

/// Timed stage as placed on a stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord {
    pub task: usize,
    pub engine: EngineChoice,
    pub stream: usize,
    pub kind: StageKind,
    pub start: f64,
    pub end: f64,
}

/// Busy time per resource over one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResourceBusy {
    pub pcie: f64,
    pub gpu: f64,
    pub cpu: f64,
}

impl ResourceBusy {
    pub fn max(&self) -> f64 {
        self.pcie.max(self.gpu).max(self.cpu)
    }
}

/// Per-iteration measurements; the first twelve fields form the CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationMetrics {
    pub iteration: u32,
    pub active_vertices: u64,
    pub active_edges: u64,
    pub filter_partitions: u64,
    pub compaction_partitions: u64,
    pub zerocopy_partitions: u64,
    pub bytes_filter: u64,
    pub bytes_compaction_payload: u64,
    pub bytes_zerocopy_lines: u64,
    pub tlps_total: u64,
    pub cpu_compact_time: f64,
    pub makespan: f64,
    // Detail beyond the CSV schema.
    pub resource_busy: ResourceBusy,
    pub sum_stage_durations: f64,
    pub recompute_edges: u64,
    pub selection_bytes: u64,
    pub schedule: Vec<StageRecord>,
}

impl IterationMetrics {
    /// Bytes moved over the bus this iteration.
    pub fn transfer_bytes(&self) -> u64 {
        self.bytes_filter + self.bytes_compaction_payload + self.bytes_zerocopy_lines
    }
}

/// Knobs of the execution simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub streams: usize,
    pub policy: PriorityPolicy,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { streams: DEFAULT_STREAMS, policy: PriorityPolicy::default() }
    }
}

struct Stage {
    kind: StageKind,
    resources: u8,
    duration: f64,
}

struct TaskSpec {
    engine: EngineChoice,
    stages: Vec<Stage>,
}

/// Outcome of one unit's data-flow execution.
struct UnitExec {
    first_pass_edges: u64,
    recompute_edges: u64,
}

/// Execute one prepared plan: apply vertex updates, advance the frontier,
/// and measure the iteration on the simulated clock.
pub fn run_iteration(
    g: &CsrGraph,
    table: &PartitionTable,
    plan: &TransferPlan,
    activities: &[PartitionActivity],
    frontier: &FrontierState,
    state: &mut AlgorithmState,
    cfg: &CostModelConfig,
    params: &SimParams,
) -> Result<(FrontierState, IterationMetrics)> {
    check_consistency(table, plan, activities, frontier)?;
    if params.streams == 0 {
        return Err(Error::Config("stream count must be positive".into()));
    }

    let n = g.num_vertices();
    let snapshot = params.policy.is_synchronous().then(|| state.clone());
    let recompute = params.policy.recompute_enabled();
    let mut updated = Bitmap::new(n as usize);

    // Data-flow half: dispatch order is filter units (already prioritized),
    // then the zero-copy unit, then the compaction unit.
    let mut tasks: Vec<TaskSpec> = Vec::new();
    let mut recompute_edges_total = 0u64;

    for unit in &plan.filter_units {
        let exec = exec_filter_unit(g, table, unit, frontier, state, snapshot.as_ref(), &mut updated, recompute);
        recompute_edges_total += exec.recompute_edges;
        tasks.push(filter_task(unit, &exec, cfg));
    }
    if let Some(unit) = &plan.zero_copy_unit {
        let exec = exec_zero_copy_unit(g, table, unit, frontier, state, snapshot.as_ref(), &mut updated);
        tasks.push(zero_copy_task(unit, &exec, cfg));
    }
    if let Some(unit) = &plan.compaction_unit {
        let exec = exec_compaction_unit(g, table, unit, frontier, state, snapshot.as_ref(), &mut updated, recompute);
        recompute_edges_total += exec.recompute_edges;
        tasks.push(compaction_task(unit, &exec, cfg));
    }

    // Timing half.
    let (makespan, busy, schedule) = schedule_tasks(&tasks, params.streams);

    let mut counts = [0u64; 3];
    for choice in plan.choices.iter().flatten() {
        match choice {
            EngineChoice::Filter => counts[0] += 1,
            EngineChoice::Compaction => counts[1] += 1,
            EngineChoice::ZeroCopy => counts[2] += 1,
        }
    }
    let sum_stage_durations: f64 =
        tasks.iter().flat_map(|t| t.stages.iter().map(|s| s.duration)).sum();
    let cpu_compact_time: f64 = tasks
        .iter()
        .flat_map(|t| t.stages.iter())
        .filter(|s| s.kind == StageKind::Compact)
        .map(|s| s.duration)
        .sum();

    let metrics = IterationMetrics {
        iteration: frontier.iteration + 1,
        active_vertices: activities.iter().map(|a| a.active_vertices).sum(),
        active_edges: activities.iter().map(|a| a.active_edges).sum(),
        filter_partitions: counts[0],
        compaction_partitions: counts[1],
        zerocopy_partitions: counts[2],
        bytes_filter: plan.filter_units.iter().map(|u| u.bytes).sum(),
        bytes_compaction_payload: plan.compaction_unit.as_ref().map_or(0, |u| u.bytes),
        bytes_zerocopy_lines: plan.zero_copy_unit.as_ref().map_or(0, |u| u.bytes),
        tlps_total: plan.units().map(|u| u.tlps).sum(),
        cpu_compact_time,
        makespan,
        resource_busy: busy,
        sum_stage_durations,
        recompute_edges: recompute_edges_total,
        selection_bytes: plan.selection_bytes,
        schedule,
    };

    let next = FrontierState { active: updated, iteration: frontier.iteration + 1 };
    Ok((next, metrics))
}

fn check_consistency(
    table: &PartitionTable,
    plan: &TransferPlan,
    activities: &[PartitionActivity],
    frontier: &FrontierState,
) -> Result<()> {
    if plan.choices.len() != table.len() || activities.len() != table.len() {
        return Err(Error::Consistency("plan and table partition counts differ".into()));
    }
    let frontier_active = frontier.active_count();
    let activity_active: u64 = activities.iter().map(|a| a.active_vertices).sum();
    if frontier_active != activity_active {
        return Err(Error::Consistency(format!(
            "frontier has {frontier_active} active vertices but activities carry {activity_active}"
        )));
    }
    for unit in plan.units() {
        for &p in &unit.partitions {
            if p >= activities.len() || !activities[p].is_active() {
                return Err(Error::Consistency(format!(
                    "task unit covers inactive partition {p}"
                )));
            }
        }
    }
    Ok(())
}

fn process_active_range(
    g: &CsrGraph,
    range: (u32, u32),
    frontier: &FrontierState,
    state: &mut AlgorithmState,
    snapshot: Option<&AlgorithmState>,
    updated: &mut Bitmap,
) -> u64 {
    let mut edges = 0u64;
    for v in frontier.active.iter_range(range.0, range.1) {
        edges += g.out_degree(v) as u64;
        state.process_vertex(g, v, snapshot, &mut |w| updated.set(w));
    }
    edges
}

/// Whole partitions are resident: push every active vertex, then under
/// asynchronous policies re-push the unit's vertices whose values changed
/// so far this iteration.
fn exec_filter_unit(
    g: &CsrGraph,
    table: &PartitionTable,
    unit: &TaskUnit,
    frontier: &FrontierState,
    state: &mut AlgorithmState,
    snapshot: Option<&AlgorithmState>,
    updated: &mut Bitmap,
    recompute: bool,
) -> UnitExec {
    let mut first = 0u64;
    for &p in &unit.partitions {
        first += process_active_range(g, table.ranges[p], frontier, state, snapshot, updated);
    }
    let mut again = 0u64;
    if recompute {
        let eligible: Vec<u32> = unit
            .partitions
            .iter()
            .flat_map(|&p| updated.iter_range(table.ranges[p].0, table.ranges[p].1))
            .collect();
        for v in eligible {
            again += g.out_degree(v) as u64;
            state.process_vertex(g, v, snapshot, &mut |w| updated.set(w));
        }
    }
    UnitExec { first_pass_edges: first, recompute_edges: again }
}

/// On-demand reads: push every active vertex straight off the host arrays.
/// Nothing stays resident, so there is no recompute pass.
fn exec_zero_copy_unit(
    g: &CsrGraph,
    table: &PartitionTable,
    unit: &TaskUnit,
    frontier: &FrontierState,
    state: &mut AlgorithmState,
    snapshot: Option<&AlgorithmState>,
    updated: &mut Bitmap,
) -> UnitExec {
    let mut first = 0u64;
    for &p in &unit.partitions {
        first += process_active_range(g, table.ranges[p], frontier, state, snapshot, updated);
    }
    UnitExec { first_pass_edges: first, recompute_edges: 0 }
}

/// Gather the active vertices' neighbor lists (and weights) into compacted
/// arrays with a per-vertex index, then process from the compacted copy.
/// Only that copy is resident, so the recompute pass re-pushes the original
/// active vertices whose values changed since.
fn exec_compaction_unit(
    g: &CsrGraph,
    table: &PartitionTable,
    unit: &TaskUnit,
    frontier: &FrontierState,
    state: &mut AlgorithmState,
    snapshot: Option<&AlgorithmState>,
    updated: &mut Bitmap,
    recompute: bool,
) -> UnitExec {
    let mut index: Vec<(u32, u32, u32)> = Vec::new(); // (vertex, start, len)
    let mut neighbors: Vec<u32> = Vec::new();
    let mut weights: Option<Vec<u32>> = g.weights().map(|_| Vec::new());
    for &p in &unit.partitions {
        let (start, end) = table.ranges[p];
        for v in frontier.active.iter_range(start, end) {
            let pos = neighbors.len() as u32;
            neighbors.extend_from_slice(g.neighbors(v));
            if let (Some(acc), Some(ws)) = (weights.as_mut(), g.edge_weights(v)) {
                acc.extend_from_slice(ws);
            }
            index.push((v, pos, g.out_degree(v)));
        }
    }

    let push_compacted = |state: &mut AlgorithmState,
                          entry: (u32, u32, u32),
                          updated: &mut Bitmap| {
        let (v, start, len) = entry;
        let (start, len) = (start as usize, len as usize);
        let nb = &neighbors[start..start + len];
        let ws = weights.as_ref().map(|w| &w[start..start + len]);
        state.process_edges(v, nb, ws, snapshot, &mut |w| updated.set(w));
        len as u64
    };

    let mut first = 0u64;
    for &entry in &index {
        first += push_compacted(state, entry, updated);
    }
    let mut again = 0u64;
    if recompute {
        let eligible: Vec<(u32, u32, u32)> =
            index.iter().copied().filter(|&(v, _, _)| updated.get(v)).collect();
        for entry in eligible {
            again += push_compacted(state, entry, updated);
        }
    }
    UnitExec { first_pass_edges: first, recompute_edges: again }
}

fn kernel_time(edges: u64, cfg: &CostModelConfig) -> f64 {
    edges as f64 / cfg.kernel_throughput
}

fn filter_task(unit: &TaskUnit, exec: &UnitExec, cfg: &CostModelConfig) -> TaskSpec {
    let mut stages = vec![
        Stage { kind: StageKind::Transfer, resources: PCIE, duration: unit.transfer_cost },
        Stage { kind: StageKind::Kernel, resources: GPU, duration: kernel_time(exec.first_pass_edges, cfg) },
    ];
    if exec.recompute_edges > 0 {
        stages.push(Stage {
            kind: StageKind::Recompute,
            resources: GPU,
            duration: kernel_time(exec.recompute_edges, cfg),
        });
    }
    TaskSpec { engine: EngineChoice::Filter, stages }
}

fn zero_copy_task(unit: &TaskUnit, exec: &UnitExec, cfg: &CostModelConfig) -> TaskSpec {
    let duration = unit.transfer_cost.max(kernel_time(exec.first_pass_edges, cfg));
    TaskSpec {
        engine: EngineChoice::ZeroCopy,
        stages: vec![Stage { kind: StageKind::Fused, resources: PCIE | GPU, duration }],
    }
}

fn compaction_task(unit: &TaskUnit, exec: &UnitExec, cfg: &CostModelConfig) -> TaskSpec {
    let mut stages = vec![
        Stage {
            kind: StageKind::Compact,
            resources: CPU,
            duration: unit.bytes as f64 / cfg.compaction_throughput,
        },
        Stage { kind: StageKind::Transfer, resources: PCIE, duration: unit.transfer_cost },
        Stage { kind: StageKind::Kernel, resources: GPU, duration: kernel_time(exec.first_pass_edges, cfg) },
    ];
    if exec.recompute_edges > 0 {
        stages.push(Stage {
            kind: StageKind::Recompute,
            resources: GPU,
            duration: kernel_time(exec.recompute_edges, cfg),
        });
    }
    TaskSpec { engine: EngineChoice::Compaction, stages }
}

/// Event-driven list scheduler. Tasks are pulled by the lowest-index idle
/// stream in plan order; a ready stage starts as soon as all its resources
/// are free, granted in task order at every event time.
fn schedule_tasks(tasks: &[TaskSpec], streams: usize) -> (f64, ResourceBusy, Vec<StageRecord>) {
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Event {
        time: f64,
        seq: u64,
        task: usize,
        stage: usize,
    }
    impl Eq for Event {}
    impl Ord for Event {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // Reversed: BinaryHeap pops the earliest event first.
            other
                .time
                .total_cmp(&self.time)
                .then(other.seq.cmp(&self.seq))
        }
    }
    impl PartialOrd for Event {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut records: Vec<StageRecord> = Vec::new();
    let mut busy = ResourceBusy::default();
    if tasks.is_empty() {
        return (0.0, busy, records);
    }

    let mut heap: BinaryHeap<Event> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut resource_free: u8 = PCIE | GPU | CPU;
    let mut waiting: Vec<(usize, usize)> = Vec::new(); // (task, stage), kept sorted by task
    let mut task_stream = vec![usize::MAX; tasks.len()];
    let mut idle_streams: Vec<usize> = (0..streams).rev().collect(); // pop() yields lowest
    let mut pending = 0usize; // next unassigned task
    let mut makespan = 0.0f64;

    let assign = |idle: &mut Vec<usize>,
                  pending: &mut usize,
                  waiting: &mut Vec<(usize, usize)>,
                  task_stream: &mut Vec<usize>| {
        while *pending < tasks.len() {
            let Some(stream) = idle.pop() else { break };
            task_stream[*pending] = stream;
            let pos = waiting.partition_point(|&(t, _)| t < *pending);
            waiting.insert(pos, (*pending, 0));
            *pending += 1;
        }
    };

    assign(&mut idle_streams, &mut pending, &mut waiting, &mut task_stream);

    // Start every waiting stage whose resources are all free, in task order.
    macro_rules! try_start {
        ($now:expr) => {{
            let mut i = 0;
            while i < waiting.len() {
                let (task, stage) = waiting[i];
                let spec = &tasks[task].stages[stage];
                if resource_free & spec.resources == spec.resources {
                    waiting.remove(i);
                    resource_free &= !spec.resources;
                    let end = $now + spec.duration;
                    records.push(StageRecord {
                        task,
                        engine: tasks[task].engine,
                        stream: task_stream[task],
                        kind: spec.kind,
                        start: $now,
                        end,
                    });
                    seq += 1;
                    heap.push(Event { time: end, seq, task, stage });
                } else {
                    i += 1;
                }
            }
        }};
    }

    try_start!(0.0);

    while let Some(Event { time, task, stage, .. }) = heap.pop() {
        let spec = &tasks[task].stages[stage];
        resource_free |= spec.resources;
        if spec.resources & PCIE != 0 {
            busy.pcie += spec.duration;
        }
        if spec.resources & GPU != 0 {
            busy.gpu += spec.duration;
        }
        if spec.resources & CPU != 0 {
            busy.cpu += spec.duration;
        }
        makespan = makespan.max(time);

        if stage + 1 < tasks[task].stages.len() {
            let pos = waiting.partition_point(|&(t, _)| t < task);
            waiting.insert(pos, (task, stage + 1));
        } else {
            idle_streams.push(task_stream[task]);
            idle_streams.sort_unstable_by(|a, b| b.cmp(a));
            assign(&mut idle_streams, &mut pending, &mut waiting, &mut task_stream);
        }
        try_start!(time);
    }
    debug_assert!(waiting.is_empty());
    (makespan, busy, records)
}
