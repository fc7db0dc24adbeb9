//! Transfer-managed out-of-core graph processing, simulated at desk scale.
//!
//! The library models a platform whose edge data lives in host memory while
//! vertex state lives on an accelerator behind a narrow bus. Oversized
//! graphs are split into edge-balanced partitions; every iteration, each
//! partition holding active edges is priced under three transfer engines
//! (whole-partition filtering, host-side compaction, on-demand zero-copy
//! reads), assigned the cheapest, combined into task units, and replayed on
//! a multi-stream discrete-event clock while the vertex program runs to
//! convergence.
//!
//! Start from [`run::run`] for whole executions, or from the
//! `examples/` directory for one runnable walkthrough per capability:
//!
//! ```no_run
//! use xfergraph::algo::Algo;
//! use xfergraph::graph::CsrGraph;
//! use xfergraph::run::{run, RunOptions};
//!
//! let g = CsrGraph::from_edges(3, &[(0, 1), (1, 2)], None)?;
//! let (report, state) = run(&g, &RunOptions::new(Algo::Bfs))?;
//! println!("{} iterations, ratio {:.3}", report.summary.iterations,
//!          report.summary.transfer_ratio);
//! # let _ = state;
//! # Ok::<(), xfergraph::error::Error>(())
//! ```

pub mod algo;
pub mod cost;
pub mod error;
pub mod frontier;
pub mod graph;
pub mod io;
pub mod partition;
pub mod plan;
pub mod report;
pub mod rmat;
pub mod run;
pub mod schedule;
pub mod sim;

pub use algo::{Algo, AlgorithmState, PageRankParams};
pub use cost::{CostModelConfig, PartitionActivity};
pub use error::{Error, Result};
pub use frontier::{Bitmap, FrontierState};
pub use graph::{CsrGraph, DegreeStats};
pub use partition::PartitionTable;
pub use plan::{EngineChoice, TransferPlan};
pub use run::{EngineMode, RunOptions, RunReport, RunSummary};
pub use schedule::{DeltaAgg, PriorityMode, PriorityPolicy};
pub use sim::{IterationMetrics, SimParams};
