//! Synthetic sensor data: random planar coordinates and smooth time-vertex
//! signals.
//!
//! A signal is `x_t = H (c + a cos(w t) + b sin(w t))` where `a, b, c` are
//! i.i.d. standard Gaussian fields on the vertices, `H = exp(-tau L)` is the
//! heat kernel of the graph with `tau = smoothness`, and `w` completes
//! [`SINUSOID_CYCLES`] periods over the T instants. Larger `tau` gives
//! spatially smoother columns; `tau = inf` gives columns that are constant
//! on each connected component.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::filters::TimeVertexSignal;
use crate::graph::{Adjacency, Graph};
use crate::harness::noise::stream_rng;

/// Number of sinusoid periods across the signal length.
pub const SINUSOID_CYCLES: f64 = 2.0;

/// Uniform points in the unit hypercube of dimension `dim`.
pub fn random_coords(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, u64::MAX);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// `exp(-tau L) x`, by scaling and squaring with truncated Taylor steps.
pub fn heat_diffuse(graph: &Graph, x: &[f64], tau: f64) -> Result<Vec<f64>> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::param(format!("smoothness must be >= 0, got {tau}")));
    }
    if tau == f64::INFINITY {
        return Ok(component_means(graph, x));
    }
    // Gershgorin: every Laplacian eigenvalue is at most twice the largest degree.
    let bound = 2.0 * graph.degree_vector().into_iter().fold(0.0, f64::max);
    if tau == 0.0 || bound == 0.0 {
        return Ok(x.to_vec());
    }
    let steps = (tau * bound).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    let mut v = x.to_vec();
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..=40 {
            let lt = graph.laplacian_apply(&term);
            let scale = -h / k as f64;
            term.iter_mut().zip(&lt).for_each(|(t, l)| *t = scale * l);
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
            let tmax = term.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let amax = acc.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            if tmax <= f64::EPSILON * amax * 1e-2 {
                break;
            }
        }
        v = acc;
    }
    Ok(v)
}

fn component_means(graph: &Graph, x: &[f64]) -> Vec<f64> {
    let labels = graph.components();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (&c, &v) in labels.iter().zip(x) {
        sum[c] += v;
        count[c] += 1;
    }
    labels.iter().map(|&c| sum[c] / count[c] as f64).collect()
}

/// Deterministic smooth time-vertex signal on `graph`.
pub fn synthesize_smooth_signal(
    graph: &Graph,
    t_len: usize,
    smoothness: f64,
    seed: u64,
) -> Result<TimeVertexSignal> {
    if t_len < 2 {
        return Err(Error::param(format!("T must be at least 2, got {t_len}")));
    }
    let n = graph.n_vertices();
    let mut rng = stream_rng(seed, u64::MAX - 1);
    let mut field = || -> Result<Vec<f64>> {
        let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        heat_diffuse(graph, &raw, smoothness)
    };
    let offset = field()?;
    let cosine = field()?;
    let sine = field()?;
    let omega = 2.0 * std::f64::consts::PI * SINUSOID_CYCLES / t_len as f64;
    let values = Array2::from_shape_fn((n, t_len), |(i, t)| {
        let phase = omega * t as f64;
        offset[i] + cosine[i] * phase.cos() + sine[i] * phase.sin()
    });
    TimeVertexSignal::new(values)
}
