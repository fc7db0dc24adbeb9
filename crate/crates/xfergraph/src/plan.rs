//! Engine selection and task combination.
//!
//! Each active partition is priced under the three engines and assigned the
//! cheapest one: compaction when it beats `alpha * Tef` and `beta * Tiz`,
//! otherwise zero-copy when it beats the filter cost, otherwise filter.
//! Ties fall through; comparisons use rtt-free quantities so scaling the
//! round-trip time can never flip a decision.
//!
//! Selected partitions are then combined into scheduling units: runs of up
//! to `k` consecutive filter partitions, one merged compaction unit, and
//! one merged zero-copy unit.

use serde::Serialize;

use crate::cost::{bytes_to_tlps, zc_rtt_factor, CostModelConfig, PartitionActivity};
use crate::error::{Error, Result};
use crate::partition::PartitionTable;

/// Transfer engine assigned to a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EngineChoice {
    /// Transfer the whole partition with an explicit bulk copy.
    Filter,
    /// Compact active edges on the host, then bulk-copy the payload.
    Compaction,
    /// Read active neighbor lines on demand over the bus.
    ZeroCopy,
}

/// Pointwise selection rule over the three engine costs.
pub fn choose_engine(tef: f64, tec: f64, tiz: f64, alpha: f64, beta: f64) -> EngineChoice {
    if tec < alpha * tef && tec < beta * tiz {
        EngineChoice::Compaction
    } else if tiz < tef {
        EngineChoice::ZeroCopy
    } else {
        EngineChoice::Filter
    }
}

/// Assign an engine to every partition with active edges; inactive
/// partitions receive no choice.
pub fn select_engines(
    activities: &[PartitionActivity],
    cfg: &CostModelConfig,
) -> Vec<Option<EngineChoice>> {
    activities
        .iter()
        .map(|a| {
            if !a.is_active() {
                return None;
            }
            // rtt-free unit costs: TLP counts, with the zero-copy count
            // damped by its rtt factor.
            let tef = bytes_to_tlps(a.filter_bytes(cfg), cfg) as f64;
            let tec = bytes_to_tlps(a.compaction_bytes(cfg), cfg) as f64;
            let tiz = a.zc_requests.div_ceil(cfg.max_requests) as f64 * zc_rtt_factor(a, cfg);
            Some(choose_engine(tef, tec, tiz, cfg.alpha, cfg.beta))
        })
        .collect()
}

/// Force the same engine onto every active partition.
pub fn forced_choices(
    activities: &[PartitionActivity],
    engine: EngineChoice,
) -> Vec<Option<EngineChoice>> {
    activities.iter().map(|a| a.is_active().then_some(engine)).collect()
}

/// One scheduling unit: a group of partitions moved and processed together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskUnit {
    pub engine: EngineChoice,
    pub partitions: Vec<usize>,
    pub active_vertices: u64,
    pub active_edges: u64,
    pub total_edges: u64,
    pub zc_requests: u64,
    /// Bytes this unit moves over the bus (whole partitions for filter,
    /// compacted payload for compaction, whole touched lines for zero-copy).
    pub bytes: u64,
    /// Bus packets the transfer occupies.
    pub tlps: u64,
    /// Modeled transfer cost in abstract time.
    pub transfer_cost: f64,
}

impl TaskUnit {
    fn new(engine: EngineChoice) -> Self {
        TaskUnit {
            engine,
            partitions: Vec::new(),
            active_vertices: 0,
            active_edges: 0,
            total_edges: 0,
            zc_requests: 0,
            bytes: 0,
            tlps: 0,
            transfer_cost: 0.0,
        }
    }

    fn absorb(&mut self, a: &PartitionActivity) {
        self.partitions.push(a.partition);
        self.active_vertices += a.active_vertices;
        self.active_edges += a.active_edges;
        self.total_edges += a.total_edges;
        self.zc_requests += a.zc_requests;
    }

    fn finalize(&mut self, cfg: &CostModelConfig) {
        match self.engine {
            EngineChoice::Filter => {
                self.bytes = self.total_edges * cfg.d1;
                self.tlps = bytes_to_tlps(self.bytes, cfg);
                self.transfer_cost = self.tlps as f64 * cfg.rtt;
            }
            EngineChoice::Compaction => {
                self.bytes = self.active_edges * cfg.d1 + self.active_vertices * cfg.d2;
                self.tlps = bytes_to_tlps(self.bytes, cfg);
                self.transfer_cost = self.tlps as f64 * cfg.rtt;
            }
            EngineChoice::ZeroCopy => {
                self.bytes = self.zc_requests * cfg.m;
                self.tlps = self.zc_requests.div_ceil(cfg.max_requests);
                let ratio = if self.total_edges == 0 {
                    0.0
                } else {
                    self.active_edges as f64 / self.total_edges as f64
                };
                let factor = cfg.gamma + (1.0 - cfg.gamma) * ratio;
                self.transfer_cost = self.tlps as f64 * factor * cfg.rtt;
            }
        }
    }
}

/// Output of one round of selection and combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferPlan {
    pub filter_units: Vec<TaskUnit>,
    pub compaction_unit: Option<TaskUnit>,
    pub zero_copy_unit: Option<TaskUnit>,
    /// Per-partition assignment; `None` for inactive partitions.
    pub choices: Vec<Option<EngineChoice>>,
    /// Bytes of the selection-result copy back to the host (one byte per
    /// partition); bookkeeping only, never counted as edge transfer volume.
    pub selection_bytes: u64,
}

impl TransferPlan {
    pub fn is_empty(&self) -> bool {
        self.filter_units.is_empty()
            && self.compaction_unit.is_none()
            && self.zero_copy_unit.is_none()
    }

    pub fn units(&self) -> impl Iterator<Item = &TaskUnit> {
        self.filter_units
            .iter()
            .chain(self.zero_copy_unit.iter())
            .chain(self.compaction_unit.iter())
    }

    pub fn total_bytes(&self) -> u64 {
        self.units().map(|u| u.bytes).sum()
    }
}

/// Scan partitions in index order and package them into task units.
/// Consecutive filter partitions accumulate until `k` are gathered or a
/// non-filter partition breaks the run; compaction and zero-copy
/// partitions each merge into one unit.
pub fn build_plan(
    choices: &[Option<EngineChoice>],
    activities: &[PartitionActivity],
    table: &PartitionTable,
    cfg: &CostModelConfig,
) -> Result<TransferPlan> {
    if choices.len() != table.len() || activities.len() != table.len() {
        return Err(Error::Consistency(format!(
            "choices ({}), activities ({}) and table ({}) disagree",
            choices.len(),
            activities.len(),
            table.len()
        )));
    }
    let mut filter_units: Vec<TaskUnit> = Vec::new();
    let mut current: Option<TaskUnit> = None;
    let mut compaction = TaskUnit::new(EngineChoice::Compaction);
    let mut zero_copy = TaskUnit::new(EngineChoice::ZeroCopy);

    for (i, choice) in choices.iter().enumerate() {
        let a = &activities[i];
        match choice {
            Some(EngineChoice::Filter) => {
                let unit = current.get_or_insert_with(|| TaskUnit::new(EngineChoice::Filter));
                unit.absorb(a);
                if unit.partitions.len() == cfg.merge_width {
                    filter_units.push(current.take().unwrap());
                }
            }
            other => {
                if let Some(unit) = current.take() {
                    filter_units.push(unit);
                }
                match other {
                    Some(EngineChoice::Compaction) => compaction.absorb(a),
                    Some(EngineChoice::ZeroCopy) => zero_copy.absorb(a),
                    None => {}
                    Some(EngineChoice::Filter) => unreachable!(),
                }
            }
        }
    }
    if let Some(unit) = current.take() {
        filter_units.push(unit);
    }
    for unit in &mut filter_units {
        unit.finalize(cfg);
    }
    compaction.finalize(cfg);
    zero_copy.finalize(cfg);
    Ok(TransferPlan {
        filter_units,
        compaction_unit: (!compaction.partitions.is_empty()).then_some(compaction),
        zero_copy_unit: (!zero_copy.partitions.is_empty()).then_some(zero_copy),
        choices: choices.to_vec(),
        selection_bytes: table.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{compute_activity, cost_filter, cost_zero_copy};
    use crate::frontier::FrontierState;
    use crate::graph::CsrGraph;
    use crate::partition::partition_chunked;

    fn cfg() -> CostModelConfig {
        CostModelConfig::default()
    }

    fn activity(av: u64, ae: u64, zc: u64, total: u64, idx: usize) -> PartitionActivity {
        PartitionActivity {
            partition: idx,
            active_vertices: av,
            active_edges: ae,
            zc_requests: zc,
            total_edges: total,
        }
    }

    #[test]
    fn saturated_partition_prefers_filter() {
        // All vertices active at degree 32, aligned: Tiz == Tef, Tec is
        // larger than alpha * Tef, so the rule falls through to Filter.
        let c = cfg();
        let p = activity(600, 600 * 32, 600, 600 * 32);
        assert_eq!(cost_zero_copy(&p, &c), cost_filter(&p, &c));
        let sel = select_engines(&[p], &c);
        assert_eq!(sel, vec![Some(EngineChoice::Filter)]);
    }

    #[test]
    fn lone_vertex_in_huge_partition_prefers_zero_copy() {
        let c = cfg();
        let p = activity(1, 32, 1, 1_000_000);
        let sel = select_engines(&[p], &c);
        assert_eq!(sel, vec![Some(EngineChoice::ZeroCopy)]);
    }

    #[test]
    fn inactive_partition_gets_no_choice() {
        let c = cfg();
        let sel = select_engines(&[activity(0, 0, 0, 500, 0)], &c);
        assert_eq!(sel, vec![None]);
        // A partition whose only active vertices have no out-edges is
        // inactive for scheduling purposes.
        let sel = select_engines(&[activity(3, 0, 0, 500, 0)], &c);
        assert_eq!(sel, vec![None]);
    }

    #[test]
    fn compaction_wins_when_cheap_on_both_fronts() {
        let c = cfg();
        // Huge partition, many low-degree active vertices: requests pile up
        // for zero-copy while the compacted payload stays small.
        let av = 20_000u64;
        let p = activity(av, av, av, 10_000_000);
        let tef = bytes_to_tlps(p.filter_bytes(&c), &c) as f64;
        let tec = bytes_to_tlps(p.compaction_bytes(&c), &c) as f64;
        let tiz = p.zc_requests.div_ceil(c.max_requests) as f64 * zc_rtt_factor(&p, &c);
        assert!(tec < c.alpha * tef && tec < c.beta * tiz);
        assert_eq!(select_engines(&[p], &c), vec![Some(EngineChoice::Compaction)]);
    }

    fn plan_for(choices: &[Option<EngineChoice>]) -> TransferPlan {
        // A graph with one degree-1 vertex per partition keeps everything
        // trivially sized.
        let n = choices.len() as u32;
        let edges: Vec<(u32, u32)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        let g = CsrGraph::from_edges(n, &edges, None).unwrap();
        let table = partition_chunked(&g, 4);
        assert_eq!(table.len(), choices.len());
        let frontier = FrontierState::all(n);
        let acts = compute_activity(&g, &table, &frontier, &cfg());
        build_plan(choices, &acts, &table, &cfg()).unwrap()
    }

    #[test]
    fn five_filters_split_at_merge_width() {
        use EngineChoice::Filter;
        let plan = plan_for(&[Some(Filter); 5]);
        let units: Vec<Vec<usize>> =
            plan.filter_units.iter().map(|u| u.partitions.clone()).collect();
        assert_eq!(units, vec![vec![0, 1, 2, 3], vec![4]]);
    }

    #[test]
    fn non_filter_breaks_the_run() {
        use EngineChoice::{Compaction, Filter};
        let plan = plan_for(&[Some(Filter), Some(Compaction), Some(Filter)]);
        let units: Vec<Vec<usize>> =
            plan.filter_units.iter().map(|u| u.partitions.clone()).collect();
        assert_eq!(units, vec![vec![0], vec![2]]);
        assert_eq!(plan.compaction_unit.as_ref().unwrap().partitions, vec![1]);
        assert!(plan.zero_copy_unit.is_none());
    }

    #[test]
    fn inactive_partition_breaks_the_run_too() {
        use EngineChoice::Filter;
        let plan = plan_for(&[Some(Filter), None, Some(Filter)]);
        let units: Vec<Vec<usize>> =
            plan.filter_units.iter().map(|u| u.partitions.clone()).collect();
        assert_eq!(units, vec![vec![0], vec![2]]);
    }

    #[test]
    fn every_active_partition_lands_in_exactly_one_unit() {
        use EngineChoice::*;
        let choices = vec![
            Some(Filter),
            Some(Filter),
            Some(ZeroCopy),
            None,
            Some(Compaction),
            Some(Filter),
            Some(ZeroCopy),
            Some(Filter),
        ];
        let plan = plan_for(&choices);
        let mut seen = vec![0usize; choices.len()];
        for unit in plan.units() {
            for &p in &unit.partitions {
                seen[p] += 1;
            }
        }
        for (i, choice) in choices.iter().enumerate() {
            assert_eq!(seen[i], usize::from(choice.is_some()), "partition {i}");
        }
    }

    #[test]
    fn rtt_scaling_never_flips_selections() {
        let base = cfg();
        let mut scaled = cfg();
        scaled.rtt = 512.0;
        let acts: Vec<PartitionActivity> = (0..200)
            .map(|i| {
                let av = (i * 37) % 900;
                let ae = av * ((i % 13) + 1);
                activity(av as u64, ae as u64, (av + av / 3) as u64, 40_000, i)
            })
            .collect();
        assert_eq!(select_engines(&acts, &base), select_engines(&acts, &scaled));
    }
}
