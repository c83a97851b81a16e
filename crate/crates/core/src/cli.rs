//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::filters::{
    mean_filter_batch, median_filter, FilterConfig, FilterKind, PowerBase, SelectionGraph,
    TimeVertexSignal,
};
use crate::graph::{build_knn_graph, Adjacency, Graph, Weighting};
use crate::harness::io::{
    read_coords_csv, read_matrix_csv, write_edge_list, write_matrix_csv, write_sparse_coo,
    write_text,
};
use crate::harness::sweep::{run_sweep, ExperimentSpec};
use crate::khop::KHopParams;
use crate::product::TemporalParams;

pub const THREADS_ENV: &str = "TVFILTER_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "tvfilter",
    version,
    about = "Graph mean/median filters for time-varying sensor signals"
)]
pub struct Cli {
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a k-nearest-neighbor sensor graph and write it as an edge list
    BuildGraph(BuildGraphArgs),
    /// Filter a signal CSV with a mean or median graph filter
    Filter(FilterArgs),
    /// Run an SNR sweep described by a spec file
    Sweep(SweepArgs),
    /// Report sizes of the spatial and time-vertex selection graphs
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Coordinates CSV, one sensor per row
    #[arg(long)]
    pub coords: PathBuf,
    /// Input CSVs start with a header row
    #[arg(long)]
    pub header: bool,
    /// Neighbors per sensor
    #[arg(long = "knn-k", default_value_t = 5)]
    pub knn_k: usize,
    /// binary, inverse-distance or gaussian
    #[arg(long, default_value = "binary")]
    pub weighting: Weighting,
    /// Gaussian kernel width (default: mean selected edge length)
    #[arg(long)]
    pub sigma: Option<f64>,
}

impl GraphArgs {
    fn build(&self) -> Result<Graph> {
        let pts = read_coords_csv(&self.coords, self.header)?;
        let weighting = match (self.weighting, self.sigma) {
            (Weighting::Gaussian { .. }, sigma) => Weighting::Gaussian { sigma },
            (w, None) => w,
            (_, Some(_)) => return Err(Error::param("--sigma only applies to gaussian weighting")),
        };
        build_knn_graph(&pts, self.knn_k, weighting)
    }
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Edge-list CSV to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    /// Maximum hop count
    #[arg(long = "K", default_value_t = 2)]
    pub k: usize,
    /// Temporal half-window
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    /// Temporal attenuation
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Spatial attenuation
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Threshold shared by spatial and temporal selection
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Override the temporal threshold
    #[arg(long = "gamma-temporal")]
    pub gamma_temporal: Option<f64>,
    /// node-selecting, strong-product or identity
    #[arg(long, default_value = "node-selecting")]
    pub graph: SelectionGraph,
    /// Include the center node in its own neighborhood
    #[arg(long = "include-self", default_value_t = true, action = ArgAction::Set)]
    pub include_self: bool,
    /// Raise the weighted adjacency (instead of its binary pattern) to powers
    #[arg(long = "weighted-powers")]
    pub weighted_powers: bool,
}

impl SelectionArgs {
    pub fn config(&self, t_len: usize, kind: FilterKind) -> Result<FilterConfig> {
        let khop = KHopParams::new(self.k, self.beta, self.gamma)?;
        let temporal = TemporalParams::new(
            t_len,
            self.m,
            self.alpha,
            self.gamma_temporal.unwrap_or(self.gamma),
        )?;
        Ok(FilterConfig {
            khop,
            temporal,
            kind,
            include_self: self.include_self,
            graph: self.graph,
            power_base: if self.weighted_powers {
                PowerBase::Weighted
            } else {
                PowerBase::Logical
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Signal CSV, N rows x T columns
    #[arg(long)]
    pub signal: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// mean or median
    #[arg(long, default_value = "mean")]
    pub kind: FilterKind,
    /// Median only: reuse filtered values of earlier instants
    #[arg(long)]
    pub recursive: bool,
    /// Filtered N x T CSV to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Spec file (TOML)
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory for results.csv, aggregate.csv and run_info.txt
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    /// Record per-trial wall time (outputs then differ between runs)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Number of time instants
    #[arg(long, default_value_t = 2)]
    pub instants: usize,
    /// Write the NT x NT selection matrix as row,col,value
    #[arg(long)]
    pub export: Option<PathBuf>,
}

/// Formats with 6 significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.5e}")
    }
}

fn cmd_build_graph(args: &BuildGraphArgs) -> Result<()> {
    let g = args.graph.build()?;
    write_edge_list(&args.out, &g)?;
    let deg: Vec<usize> = (0..g.n_vertices()).map(|i| g.neighbors(i).len()).collect();
    println!("nodes: {}", g.n_vertices());
    println!("edges: {}", g.n_edges());
    println!(
        "degree: min {} max {}",
        deg.iter().min().unwrap_or(&0),
        deg.iter().max().unwrap_or(&0)
    );
    Ok(())
}

fn load_signal(path: &Path, header: bool, graph: &Graph) -> Result<TimeVertexSignal> {
    let x = TimeVertexSignal::new(read_matrix_csv(path, header)?)?;
    if x.n_vertices() != graph.n_vertices() {
        return Err(Error::ShapeMismatch(format!(
            "{} has {} rows but there are {} sensors",
            path.display(),
            x.n_vertices(),
            graph.n_vertices()
        )));
    }
    Ok(x)
}

fn warn_collapsed(cfg: &FilterConfig) {
    if cfg.graph == SelectionGraph::NodeSelecting && cfg.temporal.effective_window() == 0 {
        eprintln!(
            "warning: alpha = {} <= gamma = {}: temporal window collapsed to l = 0 (no neighboring instants selected)",
            sig6(cfg.temporal.alpha()),
            sig6(cfg.temporal.gamma())
        );
    }
}

fn cmd_filter(args: &FilterArgs) -> Result<()> {
    let graph = args.graph.build()?;
    let x = load_signal(&args.signal, args.graph.header, &graph)?;
    let cfg = args.selection.config(x.n_instants(), args.kind)?;
    warn_collapsed(&cfg);
    let start = Instant::now();
    let asp = cfg.selection_matrix(&graph)?;
    let y = match args.kind {
        FilterKind::Mean => mean_filter_batch(&x, &asp)?,
        FilterKind::Median => {
            let out = median_filter(&x, &cfg, &graph, args.recursive)?;
            if out.passthrough > 0 {
                eprintln!(
                    "warning: {} nodes had empty neighborhoods and were passed through",
                    out.passthrough
                );
            }
            out.signal
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    write_matrix_csv(&args.out, y.values())?;
    println!("selection nnz: {}", asp.nnz());
    println!("elapsed: {} s", sig6(elapsed));
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut spec = ExperimentSpec::from_file(&args.spec)?;
    spec.record_wall_time |= args.timing;
    let result = run_sweep(&spec)?;
    result.write(
        &args.out_dir.join("results.csv"),
        &args.out_dir.join("aggregate.csv"),
    )?;
    write_text(&args.out_dir.join("run_info.txt"), &spec.describe())?;
    println!(
        "{:<24} {:>12} {:>12} {:>10}",
        "filter", "input_db", "output_db", "std_db"
    );
    for a in result.aggregate() {
        println!(
            "{:<24} {:>12} {:>12} {:>10}",
            a.filter,
            sig6(a.input_snr_db),
            sig6(a.mean_output_snr_db),
            sig6(a.std_output_snr_db)
        );
    }
    Ok(())
}

fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let graph = args.graph.build()?;
    let cfg = args.selection.config(args.instants, FilterKind::Mean)?;
    warn_collapsed(&cfg);
    let spatial = cfg.spatial_selection(&graph)?;
    let asp = cfg.selection_matrix(&graph)?;
    let deg = asp.degree_vector();
    println!("nodes: {}", graph.n_vertices());
    println!("graph edges: {}", graph.n_edges());
    println!("spatial selection nnz: {}", spatial.nnz());
    println!(
        "temporal window: {}",
        cfg.temporal_window().min(args.instants - 1)
    );
    println!("selection dim: {}", asp.dim());
    println!("selection nnz: {}", asp.nnz());
    println!(
        "selection degree: min {} max {}",
        sig6(deg.iter().copied().fold(f64::INFINITY, f64::min)),
        sig6(deg.iter().copied().fold(0.0, f64::max))
    );
    if let Some(path) = &args.export {
        write_sparse_coo(path, &asp)?;
    }
    Ok(())
}

/// Executes a parsed command line and returns the process exit code:
/// 0 on success, 2 for bad input (files, flags, shapes), 1 otherwise.
pub fn run(cli: Cli) -> i32 {
    if cli.threads > 0 {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let outcome = match &cli.command {
        Command::BuildGraph(a) => cmd_build_graph(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}
