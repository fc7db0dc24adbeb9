//! Contribution-driven ordering of filter task units.
//!
//! Filter units are reordered by a per-unit contribution score before
//! dispatch: the summed hub score of their active vertices, or the summed
//! (or maximal) pending residual for accumulation algorithms. The merged
//! zero-copy and compaction units are single tasks and keep their place.
//! Non-synchronous modes also enable one extra processing pass over each
//! explicitly loaded unit while its data is resident.

use crate::algo::AlgorithmState;
use crate::error::{Error, Result};
use crate::frontier::FrontierState;
use crate::partition::PartitionTable;
use crate::plan::{TaskUnit, TransferPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorityMode {
    /// Synchronous rounds, plan order untouched, no recompute pass.
    None,
    /// Order filter units by summed hub score of their active vertices.
    HubDriven,
    /// Order filter units by pending residual mass (accumulation only).
    DeltaDriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaAgg {
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PriorityPolicy {
    pub mode: PriorityMode,
    pub delta_agg: DeltaAgg,
    /// Extra passes over a loaded unit; fixed at one.
    pub recompute_rounds: u32,
}

impl Default for PriorityPolicy {
    fn default() -> Self {
        PriorityPolicy { mode: PriorityMode::None, delta_agg: DeltaAgg::Sum, recompute_rounds: 1 }
    }
}

impl PriorityPolicy {
    pub fn new(mode: PriorityMode) -> Self {
        PriorityPolicy { mode, ..Default::default() }
    }

    /// Synchronous mode reads from an iteration-start snapshot; the other
    /// modes consume fresh values in dispatch order.
    pub fn is_synchronous(&self) -> bool {
        self.mode == PriorityMode::None
    }

    /// The recompute pass runs only under asynchronous scheduling.
    pub fn recompute_enabled(&self) -> bool {
        self.mode != PriorityMode::None && self.recompute_rounds > 0
    }

    pub fn validate(&self, state: &AlgorithmState) -> Result<()> {
        if self.mode == PriorityMode::DeltaDriven && !state.algo().is_accumulative() {
            return Err(Error::Config(format!(
                "delta-driven priority requires an accumulation algorithm, not {}",
                state.algo().name()
            )));
        }
        Ok(())
    }
}

fn unit_score(
    unit: &TaskUnit,
    table: &PartitionTable,
    frontier: &FrontierState,
    state: &AlgorithmState,
    hub_scores: Option<&[f64]>,
    policy: &PriorityPolicy,
) -> f64 {
    let mut sum = 0.0f64;
    let mut max = 0.0f64;
    for &p in &unit.partitions {
        let (start, end) = table.ranges[p];
        for v in frontier.active.iter_range(start, end) {
            let contribution = match policy.mode {
                PriorityMode::HubDriven => {
                    hub_scores.expect("hub scores required for hub priority")[v as usize]
                }
                PriorityMode::DeltaDriven => match state {
                    AlgorithmState::PageRank { delta, .. } => delta[v as usize].abs(),
                    _ => unreachable!("validated earlier"),
                },
                PriorityMode::None => 0.0,
            };
            sum += contribution;
            max = max.max(contribution);
        }
    }
    match (policy.mode, policy.delta_agg) {
        (PriorityMode::DeltaDriven, DeltaAgg::Max) => max,
        _ => sum,
    }
}

/// Reorder the plan's filter units by descending contribution score (ties
/// keep the lower unit index first). `PriorityMode::None` leaves the plan
/// untouched.
pub fn prioritize(
    plan: &mut TransferPlan,
    table: &PartitionTable,
    frontier: &FrontierState,
    state: &AlgorithmState,
    hub_scores: Option<&[f64]>,
    policy: &PriorityPolicy,
) -> Result<()> {
    policy.validate(state)?;
    if policy.mode == PriorityMode::None || plan.filter_units.len() < 2 {
        return Ok(());
    }
    let mut scored: Vec<(f64, usize)> = plan
        .filter_units
        .iter()
        .enumerate()
        .map(|(i, u)| (unit_score(u, table, frontier, state, hub_scores, policy), i))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut reordered = Vec::with_capacity(plan.filter_units.len());
    for &(_, i) in &scored {
        reordered.push(plan.filter_units[i].clone());
    }
    plan.filter_units = reordered;
    Ok(())
}
