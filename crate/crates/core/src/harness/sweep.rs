//! Experiment sweeps: for every input SNR and trial, corrupt the clean signal,
//! run each configured filter and record the output SNR.
//!
//! The noisy matrix for a given `(snr, trial)` is shared by all filters, so
//! filters are compared on identical inputs. Each `(snr, trial)` pair draws
//! from its own generator substream, which keeps parallel and serial runs
//! identical.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filters::{
    mean_filter_batch, FilterConfig, FilterKind, PowerBase, SelectionGraph, SequentialPlan,
    TimeVertexSignal,
};
use crate::graph::{build_knn_graph, Graph, SelectionMatrix, Weighting};
use crate::harness::io::{fmt_f64, read_coords_csv, read_matrix_csv, write_text};
use crate::harness::noise::{add_scaled_noise, snr_db, stream_rng, NoiseModel, RNG_ALGORITHM};
use crate::harness::synth::{random_coords, synthesize_smooth_signal};
use crate::khop::KHopParams;
use crate::product::TemporalParams;

/// Where the clean signal comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// N x T signal CSV plus N x d coordinates CSV.
    Csv {
        signal: PathBuf,
        coords: PathBuf,
        header: bool,
    },
    /// Random planar sensors with a heat-kernel smoothed signal.
    Synthetic {
        nodes: usize,
        instants: usize,
        dim: usize,
        smoothness: f64,
    },
}

/// One filter of a sweep. Temporal parameters are completed with the signal
/// length once the dataset is loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub label: String,
    pub kind: FilterKind,
    pub graph: SelectionGraph,
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Temporal threshold; defaults to `gamma`.
    pub gamma_temporal: Option<f64>,
    pub include_self: bool,
    pub recursive: bool,
    pub power_base: PowerBase,
}

impl FilterSpec {
    pub fn config(&self, t_len: usize) -> Result<FilterConfig> {
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
            kind: self.kind,
            include_self: self.include_self,
            graph: self.graph,
            power_base: self.power_base,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub dataset: Dataset,
    pub knn_k: usize,
    pub weighting: Weighting,
    pub filters: Vec<FilterSpec>,
    pub input_snrs: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub noise: NoiseModel,
    /// Fill the `wall_time_s` column. Off by default because timings make
    /// reruns differ byte-for-byte.
    pub record_wall_time: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    seed: u64,
    trials: usize,
    input_snrs: Vec<f64>,
    #[serde(default = "default_knn_k")]
    knn_k: usize,
    #[serde(default = "default_weighting")]
    weighting: String,
    #[serde(default = "default_noise")]
    noise: String,
    #[serde(default)]
    impulse_prob: Option<f64>,
    #[serde(default)]
    impulse_scale: Option<f64>,
    #[serde(default)]
    record_wall_time: bool,
    dataset: RawDataset,
    #[serde(rename = "filter")]
    filters: Vec<RawFilter>,
}

fn default_knn_k() -> usize {
    5
}
fn default_weighting() -> String {
    "binary".into()
}
fn default_noise() -> String {
    "gaussian".into()
}
fn default_true() -> bool {
    true
}
fn default_graph() -> String {
    "node-selecting".into()
}
fn default_one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum RawDataset {
    Csv {
        signal: PathBuf,
        coords: PathBuf,
        #[serde(default)]
        header: bool,
    },
    Synthetic {
        nodes: usize,
        instants: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        smoothness: f64,
    },
}

fn default_dim() -> usize {
    2
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    label: String,
    kind: String,
    #[serde(default = "default_graph")]
    graph: String,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M", default = "default_m")]
    m: usize,
    #[serde(default = "default_one")]
    alpha: f64,
    #[serde(default = "default_one")]
    beta: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    gamma_temporal: Option<f64>,
    #[serde(default = "default_true")]
    include_self: bool,
    #[serde(default)]
    recursive: bool,
    #[serde(default)]
    power_base: Option<String>,
}

fn default_m() -> usize {
    1
}

impl ExperimentSpec {
    /// Parses the TOML spec format; see the crate README for the keys.
    /// Relative dataset paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
            path: base_dir.to_path_buf(),
            msg: e.to_string(),
        })?;
        let dataset = match raw.dataset {
            RawDataset::Csv {
                signal,
                coords,
                header,
            } => Dataset::Csv {
                signal: base_dir.join(signal),
                coords: base_dir.join(coords),
                header,
            },
            RawDataset::Synthetic {
                nodes,
                instants,
                dim,
                smoothness,
            } => Dataset::Synthetic {
                nodes,
                instants,
                dim,
                smoothness,
            },
        };
        let noise = match raw.noise.as_str() {
            "gaussian" => NoiseModel::Gaussian,
            "mixed" => NoiseModel::Mixed {
                impulse_prob: raw.impulse_prob.unwrap_or(0.05),
                impulse_scale: raw.impulse_scale.unwrap_or(5.0),
            },
            other => {
                return Err(Error::param(format!(
                    "unknown noise model {other:?} (expected gaussian or mixed)"
                )))
            }
        };
        let filters = raw
            .filters
            .into_iter()
            .map(|f| {
                Ok(FilterSpec {
                    label: f.label,
                    kind: f.kind.parse()?,
                    graph: f.graph.parse()?,
                    k: f.k,
                    m: f.m,
                    alpha: f.alpha,
                    beta: f.beta,
                    gamma: f.gamma,
                    gamma_temporal: f.gamma_temporal,
                    include_self: f.include_self,
                    recursive: f.recursive,
                    power_base: match f.power_base.as_deref() {
                        None | Some("logical") => PowerBase::Logical,
                        Some("weighted") => PowerBase::Weighted,
                        Some(other) => {
                            return Err(Error::param(format!(
                                "unknown power_base {other:?} (expected logical or weighted)"
                            )))
                        }
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = ExperimentSpec {
            dataset,
            knn_k: raw.knn_k,
            weighting: raw.weighting.parse()?,
            filters,
            input_snrs: raw.input_snrs,
            trials: raw.trials,
            seed: raw.seed,
            noise,
            record_wall_time: raw.record_wall_time,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        ExperimentSpec::parse(&text, base).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse {
                path: path.to_path_buf(),
                msg,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.input_snrs.is_empty() || self.input_snrs.iter().any(|s| !s.is_finite()) {
            return Err(Error::param(
                "input_snrs must be a non-empty list of finite values",
            ));
        }
        if self.filters.is_empty() {
            return Err(Error::param("at least one [[filter]] is required"));
        }
        let mut labels: Vec<&str> = self.filters.iter().map(|f| f.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("filter labels must be unique"));
        }
        if labels.iter().any(|l| l.contains([',', '"', '\n'])) {
            return Err(Error::param(
                "filter labels may not contain commas, quotes or newlines",
            ));
        }
        self.noise.validate()
    }

    /// Key-value summary of the run settings, including the RNG algorithm.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("rng = {RNG_ALGORITHM}\nseed = {}\n", self.seed));
        out.push_str(&format!("trials = {}\n", self.trials));
        let snrs: Vec<String> = self.input_snrs.iter().map(|&s| fmt_f64(s)).collect();
        out.push_str(&format!("input_snrs = [{}]\n", snrs.join(", ")));
        out.push_str(&format!("noise = {:?}\n", self.noise));
        out.push_str(&format!(
            "knn_k = {}\nweighting = {:?}\n",
            self.knn_k, self.weighting
        ));
        out.push_str(&format!("dataset = {:?}\n", self.dataset));
        for f in &self.filters {
            out.push_str(&format!("filter = {f:?}\n"));
        }
        out
    }
}

/// Clean signal and the sensor graph built over its coordinates.
pub fn load_dataset(spec: &ExperimentSpec) -> Result<(Graph, TimeVertexSignal)> {
    match &spec.dataset {
        Dataset::Csv {
            signal,
            coords,
            header,
        } => {
            let x = read_matrix_csv(signal, *header)?;
            let pts = read_coords_csv(coords, *header)?;
            if pts.len() != x.nrows() {
                return Err(Error::ShapeMismatch(format!(
                    "{} has {} rows but {} lists {} sensors",
                    signal.display(),
                    x.nrows(),
                    coords.display(),
                    pts.len()
                )));
            }
            let graph = build_knn_graph(&pts, spec.knn_k, spec.weighting)?;
            Ok((graph, TimeVertexSignal::new(x)?))
        }
        Dataset::Synthetic {
            nodes,
            instants,
            dim,
            smoothness,
        } => {
            let pts = random_coords(*nodes, *dim, spec.seed);
            let graph = build_knn_graph(&pts, spec.knn_k, spec.weighting)?;
            let x = synthesize_smooth_signal(&graph, *instants, *smoothness, spec.seed)?;
            Ok((graph, x))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub filter: String,
    pub input_snr_db: f64,
    pub trial: usize,
    pub output_snr_db: f64,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub filter: String,
    pub input_snr_db: f64,
    pub mean_output_snr_db: f64,
    /// Sample standard deviation (n - 1); 0 for a single trial.
    pub std_output_snr_db: f64,
}

/// Rows ordered by filter (spec order), then input SNR, then trial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

pub const RESULTS_HEADER: &str = "filter,input_snr_db,trial,output_snr_db,wall_time_s";
pub const AGGREGATE_HEADER: &str = "filter,input_snr_db,mean_output_snr_db,std_output_snr_db";

impl ExperimentResult {
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut out: Vec<AggregateRow> = Vec::new();
        let mut start = 0;
        while start < self.rows.len() {
            let head = &self.rows[start];
            let end = start
                + self.rows[start..]
                    .iter()
                    .take_while(|r| r.filter == head.filter && r.input_snr_db == head.input_snr_db)
                    .count();
            let vals: Vec<f64> = self.rows[start..end]
                .iter()
                .map(|r| r.output_snr_db)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            out.push(AggregateRow {
                filter: head.filter.clone(),
                input_snr_db: head.input_snr_db,
                mean_output_snr_db: mean,
                std_output_snr_db: std,
            });
            start = end;
        }
        out
    }

    pub fn results_csv(&self) -> String {
        let mut out = format!("{RESULTS_HEADER}\n");
        for r in &self.rows {
            let wall = r.wall_time_s.map(fmt_f64).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.filter,
                fmt_f64(r.input_snr_db),
                r.trial,
                fmt_f64(r.output_snr_db),
                wall
            ));
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = format!("{AGGREGATE_HEADER}\n");
        for a in self.aggregate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                a.filter,
                fmt_f64(a.input_snr_db),
                fmt_f64(a.mean_output_snr_db),
                fmt_f64(a.std_output_snr_db)
            ));
        }
        out
    }

    pub fn write(&self, results: &Path, aggregate: &Path) -> Result<()> {
        write_text(results, &self.results_csv())?;
        write_text(aggregate, &self.aggregate_csv())
    }
}

enum Prepared {
    Batch(SelectionMatrix),
    Sequential {
        plan: SequentialPlan,
        recursive: bool,
    },
}

impl Prepared {
    fn run(&self, y: &TimeVertexSignal) -> Result<TimeVertexSignal> {
        match self {
            Prepared::Batch(asp) => mean_filter_batch(y, asp),
            Prepared::Sequential { plan, recursive } => Ok(plan.median(y, *recursive)?.signal),
        }
    }
}

/// Runs a sweep on an already loaded dataset.
pub fn run_sweep_on(
    spec: &ExperimentSpec,
    graph: &Graph,
    clean: &TimeVertexSignal,
) -> Result<ExperimentResult> {
    spec.validate()?;
    if clean.n_vertices() != graph.n_vertices() {
        return Err(Error::ShapeMismatch(format!(
            "signal has {} vertices, graph has {}",
            clean.n_vertices(),
            graph.n_vertices()
        )));
    }
    let t_len = clean.n_instants();
    let prepared: Vec<Prepared> = spec
        .filters
        .iter()
        .map(|f| {
            let cfg = f.config(t_len)?;
            Ok(match cfg.kind {
                FilterKind::Mean => Prepared::Batch(cfg.selection_matrix(graph)?),
                FilterKind::Median => Prepared::Sequential {
                    plan: SequentialPlan::new(graph, &cfg)?,
                    recursive: f.recursive,
                },
            })
        })
        .collect::<Result<_>>()?;

    let trials = spec.trials;
    let cells: Vec<(usize, usize)> = (0..spec.input_snrs.len())
        .flat_map(|s| (0..trials).map(move |t| (s, t)))
        .collect();
    // per cell: one (output snr, wall time) per filter
    let measured: Vec<Vec<(f64, f64)>> = cells
        .par_iter()
        .map(|&(s, trial)| {
            let mut rng = stream_rng(spec.seed, ((s as u64) << 32) | trial as u64);
            let noise = spec.noise.draw(clean.values().dim(), &mut rng);
            let noisy = add_scaled_noise(clean.values(), noise, spec.input_snrs[s])?;
            let noisy = TimeVertexSignal::new(noisy)?;
            prepared
                .iter()
                .map(|p| {
                    let start = Instant::now();
                    let out = p.run(&noisy)?;
                    let elapsed = start.elapsed().as_secs_f64();
                    Ok((snr_db(clean.values(), out.values())?, elapsed))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(spec.filters.len() * cells.len());
    for (fi, f) in spec.filters.iter().enumerate() {
        for (&(s, trial), m) in cells.iter().zip(&measured) {
            rows.push(ResultRow {
                filter: f.label.clone(),
                input_snr_db: spec.input_snrs[s],
                trial,
                output_snr_db: m[fi].0,
                wall_time_s: spec.record_wall_time.then_some(m[fi].1),
            });
        }
    }
    Ok(ExperimentResult { rows })
}

/// Loads the dataset and runs every `(filter, input SNR, trial)` cell.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let (graph, clean) = load_dataset(spec)?;
    run_sweep_on(spec, &graph, &clean)
}
