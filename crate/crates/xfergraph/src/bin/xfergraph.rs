use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xfergraph::algo::Algo;
use xfergraph::cost::read_kv_file;
use xfergraph::error::{Error, Result};
use xfergraph::graph::CsrGraph;
use xfergraph::io;
use xfergraph::partition::{hub_sort, partition_chunked, DEFAULT_HUB_FRACTION, DEFAULT_PARTITION_BYTES};
use xfergraph::report::{load_entries, render_table};
use xfergraph::rmat::{rmat_generate, RmatParams};
use xfergraph::run::{run, write_metrics, write_result_binary, write_result_text, RunOptions};
use xfergraph::schedule::{DeltaAgg, PriorityMode};

#[derive(Parser)]
#[command(name = "xfergraph", version, about = "Transfer-managed graph processing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest an edge list, hub-sort it, and persist the binary graph.
    Preprocess(PreprocessArgs),
    /// Execute an algorithm with simulated transfer management.
    Run(Box<RunArgs>),
    /// Generate a skewed random edge list.
    Rmat(RmatArgs),
    /// Join recorded metrics files into a comparison table.
    Report(ReportArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input text edge list.
    input: PathBuf,
    /// Output binary graph; sidecars `<out>.perm` and `<out>.idmap` are
    /// written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Treat the input as undirected (store both directions).
    #[arg(long)]
    undirected: bool,
    /// Parse a third per-line field as the edge weight.
    #[arg(long)]
    weighted: bool,
    /// Attach deterministic weights `(src + dst) % 64 + 1` before sorting.
    #[arg(long)]
    synth_weights: bool,
    #[arg(long, default_value_t = DEFAULT_HUB_FRACTION)]
    hub_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_PARTITION_BYTES)]
    partition_bytes: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Input graph: binary container or text edge list (detected by magic).
    input: PathBuf,
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 0)]
    source: u32,
    /// hybrid | filter | compaction | zerocopy
    #[arg(long, default_value = "hybrid")]
    engine: String,
    /// none | hub | delta
    #[arg(long, default_value = "none")]
    priority: String,
    /// sum | max
    #[arg(long, default_value = "sum")]
    delta_agg: String,
    #[arg(long, default_value_t = DEFAULT_PARTITION_BYTES)]
    partition_bytes: u64,
    #[arg(long, default_value_t = xfergraph::run::DEFAULT_MAX_ITERS)]
    max_iters: u32,
    #[arg(long, default_value_t = xfergraph::algo::DEFAULT_DAMPING)]
    damping: f64,
    #[arg(long, default_value_t = xfergraph::algo::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Store each edge in both directions before running (needed for
    /// component labels on directed inputs).
    #[arg(long)]
    symmetrize: bool,
    /// Treat a text input as undirected at load time.
    #[arg(long)]
    undirected: bool,
    /// Parse a third per-line field of a text input as the edge weight.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    #[arg(long)]
    dump_plan: Option<PathBuf>,
    #[arg(long)]
    result_out: Option<PathBuf>,
    #[arg(long)]
    result_text: Option<PathBuf>,
    #[arg(long, default_value_t = xfergraph::sim::DEFAULT_STREAMS)]
    streams: usize,
    // Cost-model overrides; defaults live in the config module.
    #[arg(long)]
    d1: Option<u64>,
    #[arg(long)]
    d2: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    mr: Option<u64>,
    #[arg(long)]
    rtt: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    compaction_throughput: Option<f64>,
    #[arg(long)]
    kernel_throughput: Option<f64>,
}

#[derive(Args)]
struct RmatArgs {
    #[arg(long)]
    vertices: u32,
    #[arg(long)]
    edges: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.57)]
    a: f64,
    #[arg(long, default_value_t = 0.19)]
    b: f64,
    #[arg(long, default_value_t = 0.19)]
    c: f64,
    #[arg(long, default_value_t = 0.05)]
    d: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Metrics CSV files written by `run --metrics-out`.
    csv: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(args) => preprocess(args),
        Command::Run(args) => run_cmd(*args),
        Command::Rmat(args) => rmat_cmd(args),
        Command::Report(args) => report_cmd(args),
    }
}

fn preprocess(args: PreprocessArgs) -> Result<()> {
    let loaded = io::load_edge_list(&args.input, !args.undirected, args.weighted)?;
    let mut g = loaded.graph;
    if args.synth_weights {
        g = g.with_synthesized_weights();
    }
    let stats = g.degree_stats();
    let (sorted, perm) = hub_sort(&g, &stats, args.hub_fraction)?;
    io::write_binary_csr(&sorted, &args.out)?;
    io::write_u32_array(&sidecar(&args.out, ".perm"), &perm)?;
    io::write_u64_array(&sidecar(&args.out, ".idmap"), &loaded.id_map)?;
    let table = partition_chunked(&sorted, args.partition_bytes);
    println!(
        "wrote {}: {} vertices, {} edges, {} partitions at {} bytes",
        args.out.display(),
        sorted.num_vertices(),
        sorted.num_edges(),
        table.len(),
        args.partition_bytes,
    );
    Ok(())
}

fn sidecar(path: &PathBuf, suffix: &str) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

fn load_graph(path: &PathBuf, undirected: bool, weighted: bool) -> Result<CsrGraph> {
    let mut magic = [0u8; 4];
    let readable = std::fs::File::open(path)
        .and_then(|mut f| std::io::Read::read(&mut f, &mut magic))
        .map_err(|e| Error::io(path, e))?;
    if readable == 4 && magic == io::CSR_MAGIC {
        io::read_binary_csr(path)
    } else {
        Ok(io::load_edge_list(path, !undirected, weighted)?.graph)
    }
}

fn run_cmd(args: RunArgs) -> Result<()> {
    let mut g = load_graph(&args.input, args.undirected, args.weighted)?;
    if args.symmetrize {
        g = g.symmetrized();
    }

    let algo: Algo = args.algo.parse()?;
    let mut opts = RunOptions::new(algo);
    opts.source = args.source;
    opts.engine = args.engine.parse()?;
    opts.policy.mode = match args.priority.as_str() {
        "none" => PriorityMode::None,
        "hub" => PriorityMode::HubDriven,
        "delta" => PriorityMode::DeltaDriven,
        other => return Err(Error::Config(format!("unknown priority '{other}'"))),
    };
    opts.policy.delta_agg = match args.delta_agg.as_str() {
        "sum" => DeltaAgg::Sum,
        "max" => DeltaAgg::Max,
        other => return Err(Error::Config(format!("unknown delta aggregation '{other}'"))),
    };
    opts.partition_bytes = args.partition_bytes;
    opts.max_iters = args.max_iters;
    opts.pagerank.damping = args.damping;
    opts.pagerank.epsilon = args.epsilon;
    opts.streams = args.streams;
    opts.dump_plan = args.dump_plan.clone();

    if let Some(config) = &args.config {
        for (key, value) in read_kv_file(config)? {
            if key == "d1" {
                opts.d1_explicit = true;
            }
            if opts.cost.apply_kv(&key, &value)? {
                continue;
            }
            match key.as_str() {
                "streams" => {
                    opts.streams = value
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid streams '{value}'")))?
                }
                other => return Err(Error::Config(format!("unknown config key '{other}'"))),
            }
        }
    }
    // CLI flags override the config file.
    if let Some(d1) = args.d1 {
        opts.cost.d1 = d1;
        opts.d1_explicit = true;
    }
    if let Some(d2) = args.d2 {
        opts.cost.d2 = d2;
    }
    if let Some(m) = args.m {
        opts.cost.m = m;
    }
    if let Some(mr) = args.mr {
        opts.cost.max_requests = mr;
    }
    if let Some(rtt) = args.rtt {
        opts.cost.rtt = rtt;
    }
    if let Some(gamma) = args.gamma {
        opts.cost.gamma = gamma;
    }
    if let Some(alpha) = args.alpha {
        opts.cost.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        opts.cost.beta = beta;
    }
    if let Some(k) = args.k {
        opts.cost.merge_width = k;
    }
    if let Some(t) = args.compaction_throughput {
        opts.cost.compaction_throughput = t;
    }
    if let Some(t) = args.kernel_throughput {
        opts.cost.kernel_throughput = t;
    }

    let (report, state) = run(&g, &opts)?;
    if let Some(path) = &args.metrics_out {
        write_metrics(path, &report)?;
    }
    if let Some(path) = &args.result_out {
        write_result_binary(&state, path)?;
    }
    if let Some(path) = &args.result_text {
        write_result_text(&state, path)?;
    }
    let s = &report.summary;
    println!(
        "{} on {} vertices / {} edges: {} iterations ({}), transfer ratio {:.4}, makespan {:.2}",
        s.algo,
        s.num_vertices,
        s.num_edges,
        s.iterations,
        if s.converged { "converged" } else { "iteration cap" },
        s.transfer_ratio,
        s.total_makespan,
    );
    Ok(())
}

fn rmat_cmd(args: RmatArgs) -> Result<()> {
    let params = RmatParams { a: args.a, b: args.b, c: args.c, d: args.d };
    let edges = rmat_generate(args.vertices, args.edges, args.seed, params)?;
    io::write_edge_list(&args.out, &edges, None)?;
    println!("wrote {} edges to {}", edges.len(), args.out.display());
    Ok(())
}

fn report_cmd(args: ReportArgs) -> Result<()> {
    if args.csv.is_empty() {
        return Err(Error::Config("report needs at least one metrics CSV".into()));
    }
    let entries = load_entries(&args.csv)?;
    print!("{}", render_table(&entries));
    Ok(())
}
