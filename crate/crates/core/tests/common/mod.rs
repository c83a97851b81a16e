//! Dense, brute-force oracles shared by the integration suites. Nothing here
//! calls into the sparse construction paths it is used to check.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::VecDeque;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvfilter::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `p`. Weights are uniform in (0.1, 2).
pub fn random_connected_graph(n: usize, p: f64, r: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    let mut adj = vec![vec![false; n]; n];
    for v in 1..n {
        let u = r.random_range(0..v);
        adj[u][v] = true;
        adj[v][u] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !adj[i][j] && r.random::<f64>() < p {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i][j] {
                edges.push((i, j, r.random_range(0.1..2.0)));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random graph, possibly disconnected.
pub fn random_graph(n: usize, p: f64, r: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if r.random::<f64>() < p {
                edges.push((i, j, r.random_range(0.1..2.0)));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Dense 0/1 indicator of nonzero weights.
pub fn dense_indicator(g: &Graph) -> Array2<f64> {
    g.to_dense().mapv(|w| if w != 0.0 { 1.0 } else { 0.0 })
}

/// All-pairs hop distances by breadth-first search (`usize::MAX` = unreachable).
pub fn bfs_distances(adj: &Array2<f64>) -> Array2<usize> {
    let n = adj.nrows();
    let mut dist = Array2::from_elem((n, n), usize::MAX);
    for s in 0..n {
        dist[[s, s]] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for u in 0..n {
                if adj[[v, u]] != 0.0 && dist[[s, u]] == usize::MAX {
                    dist[[s, u]] = dist[[s, v]] + 1;
                    queue.push_back(u);
                }
            }
        }
    }
    dist
}

pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, k) = a.dim();
    let m = b.ncols();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for l in 0..k {
                s += a[[i, l]] * b[[l, j]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

/// `sum_{k=1..K} beta^k A^k` by explicit dense powers.
pub fn dense_walk_sum(a: &Array2<f64>, k_max: usize, beta: f64) -> Array2<f64> {
    let n = a.nrows();
    let mut power = Array2::<f64>::eye(n);
    let mut sum = Array2::<f64>::zeros((n, n));
    for k in 1..=k_max {
        power = matmul(&power, a);
        let scale = beta.powi(k as i32);
        sum.zip_mut_with(&power, |s, p| *s += scale * p);
    }
    sum
}

pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(r, c)| {
        a[[r / br, c / bc]] * b[[r % br, c % bc]]
    })
}

pub fn line_graph_dense(t: usize) -> Array2<f64> {
    Array2::from_shape_fn((t, t), |(a, b)| if a.abs_diff(b) == 1 { 1.0 } else { 0.0 })
}

pub fn random_signal(n: usize, t: usize, r: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, t), |_| r.random_range(-5.0..5.0))
}

/// Exact median of a copy of `v` by full sort.
pub fn sorted_median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Spatial selection of a filter configuration rebuilt densely: walk-sum
/// threshold for the node-selecting graph, BFS hop distance for the strong
/// product, nothing for the identity.
pub fn dense_spatial(g: &Graph, cfg: &tvfilter::FilterConfig) -> Array2<f64> {
    use tvfilter::{PowerBase, SelectionGraph};
    let n = g.n_vertices();
    match cfg.graph {
        SelectionGraph::NodeSelecting => {
            let base = match cfg.power_base {
                PowerBase::Logical => dense_indicator(g),
                PowerBase::Weighted => g.to_dense(),
            };
            let s = dense_walk_sum(&base, cfg.khop.k(), cfg.khop.beta());
            Array2::from_shape_fn((n, n), |(i, j)| {
                if i != j && s[[i, j]] > cfg.khop.gamma() {
                    1.0
                } else {
                    0.0
                }
            })
        }
        SelectionGraph::StrongProduct => {
            let d = bfs_distances(&dense_indicator(g));
            Array2::from_shape_fn((n, n), |(i, j)| {
                if i != j && d[[i, j]] <= cfg.khop.k() {
                    1.0
                } else {
                    0.0
                }
            })
        }
        SelectionGraph::Identity => Array2::zeros((n, n)),
    }
}

/// Temporal reach of a configuration from the scalar predicate alone.
pub fn scalar_window(cfg: &tvfilter::FilterConfig) -> usize {
    use tvfilter::SelectionGraph;
    let t = &cfg.temporal;
    match cfg.graph {
        SelectionGraph::NodeSelecting => {
            let mut w = 0;
            for l in 1..=t.m() {
                if t.alpha().powi(l as i32) > t.gamma() {
                    w = l;
                } else {
                    break;
                }
            }
            w
        }
        SelectionGraph::StrongProduct => 1,
        SelectionGraph::Identity => 0,
    }
}

/// Every `(vertex, instant)` selected around `(i, t)`, found by scanning all
/// NT candidates.
pub fn brute_neighborhood(
    spatial: &Array2<f64>,
    window: usize,
    include_self: bool,
    t_len: usize,
    i: usize,
    t: usize,
) -> Vec<(usize, usize)> {
    let n = spatial.nrows();
    let mut out = Vec::new();
    for s in 0..t_len {
        for j in 0..n {
            let l = s.abs_diff(t);
            let picked = if l == 0 {
                spatial[[i, j]] != 0.0 || (j == i && include_self)
            } else {
                l <= window && (j == i || spatial[[i, j]] != 0.0)
            };
            if picked {
                out.push((j, s));
            }
        }
    }
    out
}

/// Random filter configuration for a signal of length `t_len`.
pub fn random_config(
    t_len: usize,
    kind: tvfilter::FilterKind,
    r: &mut ChaCha8Rng,
) -> tvfilter::FilterConfig {
    use tvfilter::{KHopParams, SelectionGraph, TemporalParams};
    let k = r.random_range(1..4);
    let beta = r.random_range(0.2..=1.0);
    let gamma = r.random_range(0.0..0.8);
    let m = r.random_range(1..t_len);
    let alpha = r.random_range(0.2..=1.0);
    let mut cfg = tvfilter::FilterConfig::new(
        KHopParams::new(k, beta, gamma).unwrap(),
        TemporalParams::new(t_len, m, alpha, gamma).unwrap(),
        kind,
    );
    if r.random::<f64>() < 0.25 {
        cfg.graph = SelectionGraph::StrongProduct;
    }
    cfg
}
