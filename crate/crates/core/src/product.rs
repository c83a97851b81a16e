//! Temporal adjacencies and NT x NT product graphs.
//!
//! All product matrices use the vertex-major block layout: block `(t, s)` is
//! the N x N relation between instant `t` and instant `s`, and vertex `i` at
//! instant `t` has flat index `t * N + i`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{SelectionKind, SelectionMatrix};

/// Temporal selection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalParams {
    t_len: usize,
    m: usize,
    alpha: f64,
    gamma: f64,
}

impl TemporalParams {
    pub fn new(t_len: usize, m: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if t_len < 2 {
            return Err(Error::param(format!("T must be at least 2, got {t_len}")));
        }
        if m == 0 || m >= t_len {
            return Err(Error::param(format!(
                "M must satisfy 1 <= M <= T - 1 (M = {m}, T = {t_len})"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!(
                "alpha must be in (0, 1], got {alpha}"
            )));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::param(format!(
                "gamma must be finite and >= 0, got {gamma}"
            )));
        }
        Ok(TemporalParams {
            t_len,
            m,
            alpha,
            gamma,
        })
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of temporal offsets `l` in `1..=M` whose block survives the
    /// `alpha^l > gamma` test. Since `alpha <= 1` the survivors form a prefix.
    pub fn effective_window(&self) -> usize {
        (1..=self.m)
            .take_while(|&l| self.alpha.powi(l as i32) > self.gamma)
            .count()
    }
}

/// Symmetric binary T x T band with ones at `1 <= |t - s| <= width`.
fn band(t_len: usize, width: usize) -> SelectionMatrix {
    let rows = (0..t_len)
        .map(|t| {
            let lo = t.saturating_sub(width);
            let hi = (t + width).min(t_len - 1);
            (lo..=hi).filter(|&s| s != t).collect()
        })
        .collect();
    SelectionMatrix::from_sorted_rows_unchecked(SelectionKind::Temporal, rows)
}

/// Undirected line graph on T instants (ones on the first off-diagonals).
pub fn line_graph_adjacency(t_len: usize) -> Result<SelectionMatrix> {
    if t_len == 0 {
        return Err(Error::param("T must be at least 1"));
    }
    Ok(band(t_len, 1))
}

/// Banded Toeplitz adjacency with ones at `1 <= |t - s| <= M`.
pub fn temporal_adjacency(t_len: usize, m: usize) -> Result<SelectionMatrix> {
    if m == 0 || m >= t_len {
        return Err(Error::param(format!(
            "M must satisfy 1 <= M <= T - 1 (M = {m}, T = {t_len})"
        )));
    }
    Ok(band(t_len, m))
}

/// `I_T (x) same + temporal (x) across`, where `temporal` has a zero diagonal.
fn assemble(
    temporal: &SelectionMatrix,
    same: &SelectionMatrix,
    across: &SelectionMatrix,
) -> SelectionMatrix {
    let n = same.dim();
    let t_len = temporal.dim();
    let rows = (0..n * t_len)
        .into_par_iter()
        .map(|flat| {
            let (t, i) = (flat / n, flat % n);
            let mut row = Vec::new();
            let before = temporal.row(t).partition_point(|&s| s < t);
            let (past, future) = temporal.row(t).split_at(before);
            for &s in past {
                row.extend(across.row(i).iter().map(|&j| s * n + j));
            }
            row.extend(same.row(i).iter().map(|&j| t * n + j));
            for &s in future {
                row.extend(across.row(i).iter().map(|&j| s * n + j));
            }
            row
        })
        .collect();
    SelectionMatrix::from_sorted_rows_unchecked(
        SelectionKind::Product {
            n_vertices: n,
            n_instants: t_len,
        },
        rows,
    )
}

fn check_spatial(a: &SelectionMatrix) -> Result<()> {
    if a.dim() == 0 {
        return Err(Error::param("spatial graph has no vertices"));
    }
    if !a.has_zero_diagonal() || !a.is_symmetric() {
        return Err(Error::param(
            "spatial selection must be symmetric with a zero diagonal",
        ));
    }
    Ok(())
}

/// Strong product of a spatial selection with the T-instant line graph:
/// `I_T (x) A + A_S (x) (A + I_N)`. The diagonal is empty.
pub fn strong_product(a_gk: &SelectionMatrix, t_len: usize) -> Result<SelectionMatrix> {
    check_spatial(a_gk)?;
    let temporal = line_graph_adjacency(t_len)?;
    Ok(assemble(&temporal, a_gk, &a_gk.with_diagonal(true)))
}

/// Node-selecting graph `I_T (x) (A + I_N) + A_T (x) (A + I_N)`, where the
/// temporal band keeps offset `l` only if `alpha^l > gamma` and `l <= M`.
///
/// Blocks are binary, so scaling by `alpha^l` and thresholding at `gamma`
/// either keeps a whole block or drops it; no fractional weights appear.
/// The diagonal is full (each node selects itself).
pub fn node_selecting_graph(
    a_gkp: &SelectionMatrix,
    p: &TemporalParams,
) -> Result<SelectionMatrix> {
    check_spatial(a_gkp)?;
    let block = a_gkp.with_diagonal(true);
    let temporal = band(p.t_len(), p.effective_window());
    Ok(assemble(&temporal, &block, &block))
}
