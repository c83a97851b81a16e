//! K-hop graphs: the plain hop-reachability graph and the attenuated,
//! thresholded variant that weights a walk of length k by `beta^k`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, SelectionKind, SelectionMatrix};

/// Largest hop count accepted by [`KHopParams`]. Walk sums are accumulated in
/// `f64`; beyond this the `beta^k` factors and walk counts stop being
/// meaningfully representable for dense graphs.
pub const MAX_HOPS: usize = 64;

/// Spatial selection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KHopParams {
    k: usize,
    beta: f64,
    gamma: f64,
}

impl KHopParams {
    pub fn new(k: usize, beta: f64, gamma: f64) -> Result<Self> {
        if k == 0 || k > MAX_HOPS {
            return Err(Error::param(format!(
                "K must be in 1..={MAX_HOPS}, got {k}"
            )));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::param(format!("beta must be in (0, 1], got {beta}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::param(format!(
                "gamma must be finite and >= 0, got {gamma}"
            )));
        }
        Ok(KHopParams { k, beta, gamma })
    }

    /// No attenuation and no threshold: selects exactly the K-hop graph.
    pub fn unweighted(k: usize) -> Result<Self> {
        KHopParams::new(k, 1.0, 0.0)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn check_square_binary_input(a: &SelectionMatrix) -> Result<()> {
    if !a.has_zero_diagonal() {
        return Err(Error::param("k-hop input must have a zero diagonal"));
    }
    if !a.is_symmetric() {
        return Err(Error::param("k-hop input must be symmetric"));
    }
    Ok(())
}

/// Pairs `(i, j)`, `i != j`, joined by a walk of length at most `k`, i.e. the
/// support of `A + A^2 + ... + A^k` with the diagonal removed.
pub fn khop_unweighted(a: &SelectionMatrix, k: usize) -> Result<SelectionMatrix> {
    check_square_binary_input(a)?;
    if k == 0 {
        return Err(Error::param("K must be at least 1"));
    }
    let n = a.dim();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            // reach = support of row i of (A + ... + A^p); grows one power per pass
            let mut reached = vec![false; n];
            let mut frontier: Vec<usize> = a.row(i).to_vec();
            for &j in &frontier {
                reached[j] = true;
            }
            for _ in 1..k {
                if frontier.is_empty() {
                    break;
                }
                let mut next = Vec::new();
                for &v in &frontier {
                    for &u in a.row(v) {
                        if !reached[u] {
                            reached[u] = true;
                            next.push(u);
                        }
                    }
                }
                frontier = next;
            }
            reached[i] = false;
            reached
                .iter()
                .enumerate()
                .filter_map(|(j, &r)| r.then_some(j))
                .collect()
        })
        .collect();
    Ok(SelectionMatrix::from_sorted_rows_unchecked(
        SelectionKind::KHop,
        rows,
    ))
}

/// Row `i` of `S = sum_{k=1..K} beta^k A^k`, computed by repeated sparse
/// vector-matrix products. Entries count weighted walks, not hop distances.
pub fn attenuated_walk_sums<A: Adjacency + Sync>(a: &A, i: usize, p: &KHopParams) -> Vec<f64> {
    let n = a.dim();
    let mut walks: Vec<f64> = vec![0.0; n];
    for (j, w) in a.row_entries(i) {
        walks[j] += w;
    }
    let mut sums: Vec<f64> = walks.iter().map(|&w| p.beta * w).collect();
    let mut next = vec![0.0; n];
    for hop in 2..=p.k {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (v, &count) in walks.iter().enumerate() {
            if count == 0.0 {
                continue;
            }
            for (u, w) in a.row_entries(v) {
                next[u] += count * w;
            }
        }
        std::mem::swap(&mut walks, &mut next);
        let scale = p.beta.powi(hop as i32);
        for (s, &c) in sums.iter_mut().zip(&walks) {
            *s += scale * c;
        }
    }
    sums
}

/// Attenuated K-hop graph: `(i, j)` is selected iff `i != j` and
/// `sum_{k=1..K} beta^k A^k [i, j] > gamma`.
///
/// `a` is normally the binary logical adjacency; a weighted [`Graph`] may be
/// passed instead, in which case walks are weighted by edge products.
/// The diagonal is cleared regardless of the walk sums.
///
/// [`Graph`]: crate::graph::Graph
pub fn khop_attenuated<A: Adjacency + Sync>(a: &A, p: &KHopParams) -> Result<SelectionMatrix> {
    let n = a.dim();
    for i in 0..n {
        for (j, w) in a.row_entries(i) {
            if j == i {
                return Err(Error::param("k-hop input must have a zero diagonal"));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::param(format!("invalid entry {w} at ({i}, {j})")));
            }
        }
    }
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            attenuated_walk_sums(a, i, p)
                .into_iter()
                .enumerate()
                .filter(|&(j, s)| j != i && s > p.gamma)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    Ok(SelectionMatrix::from_sorted_rows_unchecked(
        SelectionKind::KHop,
        rows,
    ))
}
