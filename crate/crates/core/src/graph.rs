//! Sensor graphs and binary selection matrices.
//!
//! [`Graph`] is an undirected weighted graph stored as a symmetric CSR
//! adjacency. [`SelectionMatrix`] is a binary sparse pattern used for every
//! node-selection relation in the crate: k-hop graphs, temporal bands and the
//! NT x NT product graphs.

use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Row access shared by weighted graphs and binary selection matrices.
pub trait Adjacency {
    fn dim(&self) -> usize;

    /// Stored entries of row `i` as `(column, value)`, columns ascending.
    fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_;

    /// Row sums. For binary matrices this is the number of stored entries per row.
    fn degree_vector(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.row_entries(i).map(|(_, w)| w).sum())
            .collect()
    }
}

/// Free-function form of [`Adjacency::degree_vector`].
pub fn degree_vector<A: Adjacency + ?Sized>(m: &A) -> Vec<f64> {
    m.degree_vector()
}

/// Undirected weighted graph without self-loops.
#[derive(Clone, PartialEq)]
pub struct Graph {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n_vertices", &self.n_vertices())
            .field("n_edges", &self.n_edges())
            .finish()
    }
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a graph from undirected edges `(i, j, weight)`.
    ///
    /// Each edge may be listed once in either orientation or twice (both
    /// orientations) with the same weight. Self-loops, negative or non-finite
    /// weights and conflicting duplicates are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("graph needs at least one vertex"));
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "edge ({i}, {j}) in a graph with {n} vertices"
                )));
            }
            if i == j {
                return Err(Error::param(format!("self-loop at vertex {i}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::param(format!(
                    "edge ({i}, {j}) has invalid weight {w}"
                )));
            }
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        indptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut last: Option<(usize, f64)> = None;
            for (j, w) in row {
                if let Some((lj, lw)) = last {
                    if lj == j {
                        if lw != w {
                            return Err(Error::param(format!(
                                "edge ({i}, {j}) listed with conflicting weights {lw} and {w}"
                            )));
                        }
                        continue;
                    }
                }
                indices.push(j);
                weights.push(w);
                last = Some((j, w));
            }
            indptr.push(indices.len());
        }
        Ok(Graph {
            indptr,
            indices,
            weights,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.indptr.len() - 1
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.indices.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let row = self.neighbors(i);
        match row.binary_search(&j) {
            Ok(k) => self.weights[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// Edges with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_vertices()).flat_map(move |i| {
            self.row_entries(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Dense weighted adjacency. Intended for small graphs and tests.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.n_vertices();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for (j, w) in self.row_entries(i) {
                out[[i, j]] = w;
            }
        }
        out
    }

    /// `L x = D x - A x` without materializing L.
    pub fn laplacian_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_vertices(), "vector length must equal N");
        (0..self.n_vertices())
            .map(|i| {
                self.row_entries(i)
                    .map(|(j, w)| w * (x[i] - x[j]))
                    .sum::<f64>()
            })
            .collect()
    }

    /// Laplacian quadratic form `x^T L x = sum over edges of w (x_i - x_j)^2`.
    pub fn laplacian_quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_vertices(), "vector length must equal N");
        self.edges()
            .map(|(i, j, w)| w * (x[i] - x[j]).powi(2))
            .sum()
    }

    /// Dense Laplacian `D - A`.
    pub fn laplacian_dense(&self) -> Array2<f64> {
        let mut l = -self.to_dense();
        for (i, d) in self.degree_vector().into_iter().enumerate() {
            l[[i, i]] = d;
        }
        l
    }

    /// Connected component label of each vertex, labels numbered in order of
    /// first appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n_vertices();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &u in self.neighbors(v) {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

impl Adjacency for Graph {
    fn dim(&self) -> usize {
        self.n_vertices()
    }

    fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }
}

/// What relation a [`SelectionMatrix`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionKind {
    /// Spatial N x N relation (logical adjacency or a k-hop graph).
    KHop,
    /// T x T relation between time instants.
    Temporal,
    /// NT x NT time-vertex relation. Flat index of vertex `i` at instant `t`
    /// is `t * n_vertices + i` (column stacking of the N x T signal).
    Product {
        n_vertices: usize,
        n_instants: usize,
    },
}

/// Binary sparse matrix in CSR form. Absent entries are 0, stored entries 1.
#[derive(Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    kind: SelectionKind,
    indptr: Vec<usize>,
    indices: Vec<usize>,
}

impl fmt::Debug for SelectionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelectionMatrix")
            .field("kind", &self.kind)
            .field("dim", &self.dim())
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl SelectionMatrix {
    /// Builds from per-row column lists. Rows are sorted and deduplicated.
    pub fn from_rows(kind: SelectionKind, rows: Vec<Vec<usize>>) -> Result<Self> {
        let dim = rows.len();
        if let SelectionKind::Product {
            n_vertices,
            n_instants,
        } = kind
        {
            if n_vertices * n_instants != dim {
                return Err(Error::ShapeMismatch(format!(
                    "product layout {n_vertices} x {n_instants} does not match dimension {dim}"
                )));
            }
        }
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            if let Some(&j) = row.last() {
                if j >= dim {
                    return Err(Error::IndexOutOfRange(format!(
                        "column {j} in a {dim} x {dim} matrix"
                    )));
                }
            }
            indices.extend(row);
            indptr.push(indices.len());
        }
        Ok(SelectionMatrix {
            kind,
            indptr,
            indices,
        })
    }

    /// Rows must be sorted, unique and in range; checked in debug builds only.
    pub(crate) fn from_sorted_rows_unchecked(kind: SelectionKind, rows: Vec<Vec<usize>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let total = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(total);
        indptr.push(0);
        let dim = rows.len();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            debug_assert!(row.last().is_none_or(|&j| j < dim));
            indices.extend(row);
            indptr.push(indices.len());
        }
        SelectionMatrix {
            kind,
            indptr,
            indices,
        }
    }

    pub fn zeros(kind: SelectionKind, dim: usize) -> Self {
        SelectionMatrix {
            kind,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
        }
    }

    pub fn identity(kind: SelectionKind, dim: usize) -> Self {
        SelectionMatrix {
            kind,
            indptr: (0..=dim).collect(),
            indices: (0..dim).collect(),
        }
    }

    pub fn kind(&self) -> SelectionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    /// `(n_vertices, n_instants)` for product matrices.
    pub fn product_layout(&self) -> Option<(usize, usize)> {
        match self.kind {
            SelectionKind::Product {
                n_vertices,
                n_instants,
            } => Some((n_vertices, n_instants)),
            _ => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| self.row(i).iter().all(|&j| self.contains(j, i)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| !self.contains(i, i))
    }

    /// Copy with every diagonal entry set (`true`) or cleared (`false`).
    pub fn with_diagonal(&self, present: bool) -> Self {
        let rows = (0..self.dim())
            .map(|i| {
                let mut row: Vec<usize> = self.row(i).iter().copied().filter(|&j| j != i).collect();
                if present {
                    let pos = row.partition_point(|&j| j < i);
                    row.insert(pos, i);
                }
                row
            })
            .collect();
        SelectionMatrix::from_sorted_rows_unchecked(self.kind, rows)
    }

    /// Same pattern under a different tag.
    pub fn retag(mut self, kind: SelectionKind) -> Result<Self> {
        if let SelectionKind::Product {
            n_vertices,
            n_instants,
        } = kind
        {
            if n_vertices * n_instants != self.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "product layout {n_vertices} x {n_instants} does not match dimension {}",
                    self.dim()
                )));
            }
        }
        self.kind = kind;
        Ok(self)
    }

    /// Stored entries as `(row, col)` pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim()).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        let mut out = Array2::zeros((n, n));
        for (i, j) in self.entries() {
            out[[i, j]] = 1.0;
        }
        out
    }

    /// Binary matrix from the nonzero pattern of a dense square matrix.
    pub fn from_dense(kind: SelectionKind, dense: &Array2<f64>) -> Result<Self> {
        let (r, c) = dense.dim();
        if r != c {
            return Err(Error::ShapeMismatch(format!(
                "{r} x {c} matrix is not square"
            )));
        }
        let rows = dense
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        SelectionMatrix::from_rows(kind, rows)
    }

    /// View this pattern as a binary-weighted graph. Requires a symmetric
    /// pattern without diagonal entries.
    pub fn to_graph(&self) -> Result<Graph> {
        if !self.is_symmetric() || !self.has_zero_diagonal() {
            return Err(Error::param(
                "only symmetric zero-diagonal selections can be viewed as graphs",
            ));
        }
        let edges: Vec<_> = self
            .entries()
            .filter(|&(i, j)| i < j)
            .map(|(i, j)| (i, j, 1.0))
            .collect();
        Graph::from_edges(self.dim(), &edges)
    }
}

impl Adjacency for SelectionMatrix {
    fn dim(&self) -> usize {
        SelectionMatrix::dim(self)
    }

    fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row(i).iter().map(|&j| (j, 1.0))
    }

    fn degree_vector(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.row(i).len() as f64).collect()
    }
}

/// Binary indicator of the nonzero pattern of `g`'s adjacency.
pub fn logical_adjacency(g: &Graph) -> SelectionMatrix {
    let rows = (0..g.n_vertices())
        .map(|i| {
            g.row_entries(i)
                .filter(|&(_, w)| w != 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    SelectionMatrix::from_sorted_rows_unchecked(SelectionKind::KHop, rows)
}

/// Edge weighting policy for k-nearest-neighbor graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Binary,
    /// `1 / d`.
    InverseDistance,
    /// `exp(-d^2 / (2 sigma^2))`. `None` uses the mean length of the selected edges.
    Gaussian {
        sigma: Option<f64>,
    },
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" => Ok(Weighting::Binary),
            "inverse-distance" | "inverse_distance" => Ok(Weighting::InverseDistance),
            "gaussian" => Ok(Weighting::Gaussian { sigma: None }),
            other => Err(Error::param(format!(
                "unknown weighting {other:?} (expected binary, inverse-distance or gaussian)"
            ))),
        }
    }
}

/// Symmetrized k-nearest-neighbor graph over Euclidean points.
///
/// `(i, j)` is an edge when either endpoint is among the other's `k` nearest
/// points. Distance ties are broken by the lower index.
pub fn build_knn_graph(coords: &[Vec<f64>], k: usize, weighting: Weighting) -> Result<Graph> {
    let n = coords.len();
    if n < 2 {
        return Err(Error::param("k-NN graph needs at least 2 points"));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "k must satisfy 1 <= k < N (k = {k}, N = {n})"
        )));
    }
    let d = coords[0].len();
    for (i, p) in coords.iter().enumerate() {
        if p.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "point {i} has {} components, expected {d}",
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
    }
    if let Weighting::Gaussian { sigma: Some(s) } = weighting {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::param(format!(
                "gaussian sigma must be positive, got {s}"
            )));
        }
    }

    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    let mut selected = vec![Vec::with_capacity(k); n];
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        cand.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (dist(&coords[i], &coords[j]), j)),
        );
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        cand.select_nth_unstable_by(k - 1, cmp);
        selected[i] = cand[..k].iter().map(|&(dd, j)| (j, dd)).collect();
    }

    let mut pairs: Vec<(usize, usize, f64)> = selected
        .iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().map(move |&(j, dd)| (i.min(j), i.max(j), dd)))
        .collect();
    pairs.sort_by_key(|p| (p.0, p.1));
    pairs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let sigma = match weighting {
        Weighting::Gaussian { sigma: Some(s) } => s,
        Weighting::Gaussian { sigma: None } => {
            let mean = pairs.iter().map(|p| p.2).sum::<f64>() / pairs.len() as f64;
            if mean > 0.0 {
                mean
            } else {
                1.0
            }
        }
        _ => 1.0,
    };
    let mut edges = Vec::with_capacity(pairs.len());
    for (i, j, dd) in pairs {
        let w = match weighting {
            Weighting::Binary => 1.0,
            Weighting::InverseDistance => {
                if dd == 0.0 {
                    return Err(Error::DuplicatePoints(i, j));
                }
                1.0 / dd
            }
            Weighting::Gaussian { .. } => (-dd * dd / (2.0 * sigma * sigma)).exp(),
        };
        edges.push((i, j, w));
    }
    Graph::from_edges(n, &edges)
}
