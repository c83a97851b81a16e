//! Mean and median filters over time-vertex neighborhoods.
//!
//! The sequential forms walk every `(vertex, instant)` pair and gather its
//! neighborhood directly from the spatial selection and the temporal window,
//! clamped at the signal boundaries. The batch mean evaluates
//! `diag(1 / d) A x` on an assembled NT x NT selection matrix. Both routes
//! select the same nodes, so they agree to rounding.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{logical_adjacency, Graph, SelectionKind, SelectionMatrix};
use crate::khop::{khop_attenuated, khop_unweighted, KHopParams};
use crate::product::{node_selecting_graph, strong_product, TemporalParams};

/// N x T matrix of readings; column `t` is the graph signal at instant `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVertexSignal {
    values: Array2<f64>,
}

impl TimeVertexSignal {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(((i, t), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(format!(
                "non-finite value {v} at vertex {i}, instant {t}"
            )));
        }
        if values.is_empty() {
            return Err(Error::param("signal has no entries"));
        }
        Ok(TimeVertexSignal { values })
    }

    /// Inverse of [`TimeVertexSignal::to_vec`].
    pub fn from_vec(n: usize, t_len: usize, x: &[f64]) -> Result<Self> {
        if x.len() != n * t_len {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} cannot be reshaped to {n} x {t_len}",
                x.len()
            )));
        }
        TimeVertexSignal::new(Array2::from_shape_fn((n, t_len), |(i, t)| x[t * n + i]))
    }

    pub fn n_vertices(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_instants(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, i: usize, t: usize) -> f64 {
        self.values[[i, t]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    /// Column stacking: entry `(i, t)` lands at `t * N + i`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.values.t().iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Mean,
    Median,
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(FilterKind::Mean),
            "median" => Ok(FilterKind::Median),
            other => Err(Error::param(format!(
                "unknown filter kind {other:?} (expected mean or median)"
            ))),
        }
    }
}

/// Which time-vertex selection graph the filter runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionGraph {
    /// Attenuated K-hop spatial graph with the `alpha`/`gamma` temporal window.
    NodeSelecting,
    /// Plain K-hop graph crossed with the line graph (instants `t - 1..=t + 1`).
    StrongProduct,
    /// No neighbors; only the node itself when self-inclusion is on.
    Identity,
}

impl std::str::FromStr for SelectionGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "node-selecting" | "node_selecting" | "nsg" => Ok(SelectionGraph::NodeSelecting),
            "strong-product" | "strong_product" | "sp" => Ok(SelectionGraph::StrongProduct),
            "identity" => Ok(SelectionGraph::Identity),
            other => Err(Error::param(format!(
                "unknown selection graph {other:?} (expected node-selecting, strong-product or identity)"
            ))),
        }
    }
}

/// Matrix whose powers feed the attenuated k-hop sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerBase {
    /// Binary nonzero pattern of the sensor graph.
    #[default]
    Logical,
    /// The weighted sensor adjacency itself.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub khop: KHopParams,
    pub temporal: TemporalParams,
    pub kind: FilterKind,
    /// Whether the center value `x(i, t)` belongs to its own neighborhood.
    pub include_self: bool,
    pub graph: SelectionGraph,
    pub power_base: PowerBase,
}

impl FilterConfig {
    /// Node-selecting graph, self-inclusion on, logical adjacency powers.
    pub fn new(khop: KHopParams, temporal: TemporalParams, kind: FilterKind) -> Self {
        FilterConfig {
            khop,
            temporal,
            kind,
            include_self: true,
            graph: SelectionGraph::NodeSelecting,
            power_base: PowerBase::Logical,
        }
    }

    /// Spatial N x N selection (zero diagonal) used within one instant.
    pub fn spatial_selection(&self, graph: &Graph) -> Result<SelectionMatrix> {
        match self.graph {
            SelectionGraph::NodeSelecting => match self.power_base {
                PowerBase::Logical => khop_attenuated(&logical_adjacency(graph), &self.khop),
                PowerBase::Weighted => khop_attenuated(graph, &self.khop),
            },
            SelectionGraph::StrongProduct => {
                khop_unweighted(&logical_adjacency(graph), self.khop.k())
            }
            SelectionGraph::Identity => Ok(SelectionMatrix::zeros(
                SelectionKind::KHop,
                graph.n_vertices(),
            )),
        }
    }

    /// Largest temporal offset selected around the center instant.
    pub fn temporal_window(&self) -> usize {
        match self.graph {
            SelectionGraph::NodeSelecting => self.temporal.effective_window(),
            SelectionGraph::StrongProduct => 1,
            SelectionGraph::Identity => 0,
        }
    }

    /// The NT x NT selection matrix for this configuration, with its diagonal
    /// set according to `include_self`.
    pub fn selection_matrix(&self, graph: &Graph) -> Result<SelectionMatrix> {
        let n = graph.n_vertices();
        let t_len = self.temporal.t_len();
        let asp = match self.graph {
            SelectionGraph::NodeSelecting => {
                node_selecting_graph(&self.spatial_selection(graph)?, &self.temporal)?
            }
            SelectionGraph::StrongProduct => {
                strong_product(&self.spatial_selection(graph)?, t_len)?
            }
            SelectionGraph::Identity => SelectionMatrix::identity(
                SelectionKind::Product {
                    n_vertices: n,
                    n_instants: t_len,
                },
                n * t_len,
            ),
        };
        Ok(asp.with_diagonal(self.include_self))
    }
}

/// Neighborhood of one time-vertex node in a product selection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSet {
    /// `(vertex, instant)` of the center.
    pub center: (usize, usize),
    /// Selected `(vertex, instant)` pairs, sorted by instant then vertex.
    pub members: Vec<(usize, usize)>,
    /// Members grouped by temporal offset `|instant - t|`; key 0 holds the
    /// members at the center instant.
    pub partition: BTreeMap<usize, Vec<(usize, usize)>>,
}

impl NeighborhoodSet {
    /// Values of the signal over the members.
    pub fn values(&self, x: &TimeVertexSignal) -> Vec<f64> {
        self.members.iter().map(|&(i, t)| x.get(i, t)).collect()
    }
}

/// Support of row `(i, t)` of a product selection matrix.
pub fn neighborhood(asp: &SelectionMatrix, i: usize, t: usize) -> Result<NeighborhoodSet> {
    let (n, t_len) = asp
        .product_layout()
        .ok_or_else(|| Error::param("neighborhood needs a product selection matrix"))?;
    if i >= n || t >= t_len {
        return Err(Error::IndexOutOfRange(format!(
            "node ({i}, {t}) outside {n} vertices x {t_len} instants"
        )));
    }
    let members: Vec<(usize, usize)> = asp
        .row(t * n + i)
        .iter()
        .map(|&flat| (flat % n, flat / n))
        .collect();
    let mut partition: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &(j, s) in &members {
        partition.entry(s.abs_diff(t)).or_default().push((j, s));
    }
    Ok(NeighborhoodSet {
        center: (i, t),
        members,
        partition,
    })
}

/// Filter output plus the number of nodes whose neighborhood was empty and
/// were therefore passed through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub signal: TimeVertexSignal,
    pub passthrough: usize,
}

/// Per-node neighborhood rule shared by the sequential mean and the median.
///
/// Around center `(i, t)`: at instant `t`, the spatial neighbors of `i` (plus
/// `i` itself iff `include_self`); at each instant `t +- l` with
/// `1 <= l <= window` that lies inside the signal, the spatial neighbors and
/// `i` itself. Past offsets are clamped to `t - 1`, future ones to `T - 1 - t`.
#[derive(Debug, Clone)]
pub struct SequentialPlan {
    spatial: SelectionMatrix,
    window: usize,
    include_self: bool,
    t_len: usize,
}

impl SequentialPlan {
    pub fn new(graph: &Graph, cfg: &FilterConfig) -> Result<Self> {
        Ok(SequentialPlan {
            spatial: cfg.spatial_selection(graph)?,
            window: cfg.temporal_window().min(cfg.temporal.t_len() - 1),
            include_self: cfg.include_self,
            t_len: cfg.temporal.t_len(),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_vertices(&self) -> usize {
        self.spatial.dim()
    }

    /// Calls `visit(vertex, instant)` for each member of the neighborhood of
    /// `(i, t)`, in ascending flat-index order.
    pub fn for_each_member(&self, i: usize, t: usize, mut visit: impl FnMut(usize, usize)) {
        let lo = t.saturating_sub(self.window);
        let hi = (t + self.window).min(self.t_len - 1);
        let spatial = self.spatial.row(i);
        let split = spatial.partition_point(|&j| j < i);
        for s in lo..=hi {
            let with_center = s != t || self.include_self;
            for &j in &spatial[..split] {
                visit(j, s);
            }
            if with_center {
                visit(i, s);
            }
            for &j in &spatial[split..] {
                visit(j, s);
            }
        }
    }

    fn check(&self, x: &TimeVertexSignal) -> Result<()> {
        if x.n_vertices() != self.spatial.dim() || x.n_instants() != self.t_len {
            return Err(Error::ShapeMismatch(format!(
                "signal is {} x {}, filter expects {} x {}",
                x.n_vertices(),
                x.n_instants(),
                self.spatial.dim(),
                self.t_len
            )));
        }
        Ok(())
    }

    pub fn mean(&self, x: &TimeVertexSignal) -> Result<Filtered> {
        self.check(x)?;
        let n = x.n_vertices();
        let out: Vec<Option<f64>> = (0..n * self.t_len)
            .into_par_iter()
            .map(|flat| {
                let (t, i) = (flat / n, flat % n);
                let mut sum = 0.0;
                let mut count = 0usize;
                self.for_each_member(i, t, |j, s| {
                    sum += x.get(j, s);
                    count += 1;
                });
                (count > 0).then(|| sum / count as f64)
            })
            .collect();
        Ok(self.finish(x, out))
    }

    /// Median over each neighborhood. With `recursive`, members at instants
    /// before the center take their already-filtered values.
    pub fn median(&self, x: &TimeVertexSignal, recursive: bool) -> Result<Filtered> {
        self.check(x)?;
        let n = x.n_vertices();
        if !recursive {
            let out: Vec<Option<f64>> = (0..n * self.t_len)
                .into_par_iter()
                .map_init(Vec::new, |buf, flat| {
                    let (t, i) = (flat / n, flat % n);
                    buf.clear();
                    self.for_each_member(i, t, |j, s| buf.push(x.get(j, s)));
                    median_in_place(buf)
                })
                .collect();
            return Ok(self.finish(x, out));
        }

        let mut filtered = x.values().clone();
        let mut passthrough = 0;
        for t in 0..self.t_len {
            let column: Vec<Option<f64>> = (0..n)
                .into_par_iter()
                .map_init(Vec::new, |buf, i| {
                    buf.clear();
                    self.for_each_member(i, t, |j, s| {
                        buf.push(if s < t { filtered[[j, s]] } else { x.get(j, s) });
                    });
                    median_in_place(buf)
                })
                .collect();
            for (i, v) in column.into_iter().enumerate() {
                match v {
                    Some(v) => filtered[[i, t]] = v,
                    None => passthrough += 1,
                }
            }
        }
        Ok(Filtered {
            signal: TimeVertexSignal { values: filtered },
            passthrough,
        })
    }

    fn finish(&self, x: &TimeVertexSignal, out: Vec<Option<f64>>) -> Filtered {
        let n = x.n_vertices();
        let mut passthrough = 0;
        let values = Array2::from_shape_fn((n, self.t_len), |(i, t)| match out[t * n + i] {
            Some(v) => v,
            None => {
                passthrough += 1;
                x.get(i, t)
            }
        });
        Filtered {
            signal: TimeVertexSignal { values },
            passthrough,
        }
    }
}

/// Median of `values`, reordering them. Even counts average the two central
/// order statistics. `None` for an empty slice.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let len = values.len();
    if len == 0 {
        return None;
    }
    let mid = len / 2;
    let (lower, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if len % 2 == 1 {
        Some(upper)
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((below + upper) / 2.0)
    }
}

/// Sequential graph mean filter.
pub fn mean_filter_sequential(
    x: &TimeVertexSignal,
    cfg: &FilterConfig,
    graph: &Graph,
) -> Result<Filtered> {
    check_graph(x, graph)?;
    SequentialPlan::new(graph, cfg)?.mean(x)
}

/// Graph median filter; see [`SequentialPlan::median`].
pub fn median_filter(
    x: &TimeVertexSignal,
    cfg: &FilterConfig,
    graph: &Graph,
    recursive: bool,
) -> Result<Filtered> {
    check_graph(x, graph)?;
    SequentialPlan::new(graph, cfg)?.median(x, recursive)
}

fn check_graph(x: &TimeVertexSignal, graph: &Graph) -> Result<()> {
    if x.n_vertices() != graph.n_vertices() {
        return Err(Error::ShapeMismatch(format!(
            "signal has {} vertices, graph has {}",
            x.n_vertices(),
            graph.n_vertices()
        )));
    }
    Ok(())
}

/// Batch mean `y = diag(1 / d) A x` with `x = vec(X)` and `d` the row degrees
/// of `asp`.
pub fn mean_filter_batch(x: &TimeVertexSignal, asp: &SelectionMatrix) -> Result<TimeVertexSignal> {
    let (n, t_len) = asp
        .product_layout()
        .ok_or_else(|| Error::param("batch mean filter needs a product selection matrix"))?;
    if x.n_vertices() != n || x.n_instants() != t_len {
        return Err(Error::ShapeMismatch(format!(
            "signal is {} x {}, selection matrix expects {n} x {t_len}",
            x.n_vertices(),
            x.n_instants()
        )));
    }
    if let Some(flat) = (0..asp.dim()).find(|&r| asp.row(r).is_empty()) {
        return Err(Error::ZeroDegree {
            vertex: flat % n,
            instant: flat / n,
        });
    }
    let xv = x.to_vec();
    let y: Vec<f64> = (0..asp.dim())
        .into_par_iter()
        .map(|r| {
            let row = asp.row(r);
            row.iter().map(|&c| xv[c]).sum::<f64>() / row.len() as f64
        })
        .collect();
    TimeVertexSignal::from_vec(n, t_len, &y)
}

/// Runs the configured filter. The mean goes through the batch form on the
/// assembled selection matrix.
pub fn apply_filter(
    x: &TimeVertexSignal,
    cfg: &FilterConfig,
    graph: &Graph,
    recursive: bool,
) -> Result<TimeVertexSignal> {
    match cfg.kind {
        FilterKind::Mean => {
            check_graph(x, graph)?;
            mean_filter_batch(x, &cfg.selection_matrix(graph)?)
        }
        FilterKind::Median => Ok(median_filter(x, cfg, graph, recursive)?.signal),
    }
}
