//! Filter behavior against brute-force neighborhoods, plus the algebraic
//! invariants of the mean and median filters.

mod common;

use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

use tvfilter::{
    mean_filter_batch, mean_filter_sequential, median_filter, neighborhood, FilterConfig,
    FilterKind, Graph, KHopParams, SelectionGraph, TemporalParams, TimeVertexSignal,
};

fn p3() -> Graph {
    Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
}

#[test]
fn neighborhood_matches_brute_force_scan() {
    let mut r = rng(10);
    for _ in 0..60 {
        let n = r.random_range(1..8);
        let t = r.random_range(2..8);
        let g = random_graph(n, 0.4, &mut r);
        let mut cfg = random_config(t, FilterKind::Mean, &mut r);
        cfg.include_self = r.random::<bool>();
        let asp = cfg.selection_matrix(&g).unwrap();
        let spatial = dense_spatial(&g, &cfg);
        let w = scalar_window(&cfg);
        for ti in 0..t {
            for i in 0..n {
                let nb = neighborhood(&asp, i, ti).unwrap();
                let expected = brute_neighborhood(&spatial, w, cfg.include_self, t, i, ti);
                assert_eq!(nb.members, expected);
                let regrouped: usize = nb.partition.values().map(Vec::len).sum();
                assert_eq!(regrouped, nb.members.len());
                for (l, part) in &nb.partition {
                    assert!(part.iter().all(|&(_, s)| s.abs_diff(ti) == *l));
                }
            }
        }
    }
}

#[test]
fn temporal_chain_neighborhoods() {
    let cfg = FilterConfig::new(
        KHopParams::unweighted(1).unwrap(),
        TemporalParams::new(6, 1, 1.0, 0.0).unwrap(),
        FilterKind::Mean,
    );
    let asp = cfg.selection_matrix(&Graph::empty(2)).unwrap();
    assert_eq!(
        neighborhood(&asp, 1, 3).unwrap().members,
        vec![(1, 2), (1, 3), (1, 4)]
    );
    let edge = neighborhood(&asp, 0, 0).unwrap();
    assert_eq!(edge.members, vec![(0, 0), (0, 1)]);
    assert!(edge.partition.keys().all(|&l| l <= 1));
}

#[test]
fn p3_interior_strong_product_neighborhood() {
    let mut cfg = FilterConfig::new(
        KHopParams::unweighted(1).unwrap(),
        TemporalParams::new(5, 1, 1.0, 0.0).unwrap(),
        FilterKind::Mean,
    );
    cfg.graph = SelectionGraph::StrongProduct;
    let asp = cfg.selection_matrix(&p3()).unwrap();
    // center vertex 1 at instant 2: all three vertices at instants 1, 2, 3
    let nb = neighborhood(&asp, 1, 2).unwrap();
    let expected: Vec<(usize, usize)> = (1..=3).flat_map(|s| (0..3).map(move |j| (j, s))).collect();
    assert_eq!(nb.members, expected);
}

#[test]
fn interior_and_boundary_regimes() {
    // interior nodes see the full window, boundary nodes the clamped one
    let g = p3();
    let cfg = FilterConfig::new(
        KHopParams::unweighted(1).unwrap(),
        TemporalParams::new(9, 3, 0.9, 0.5).unwrap(),
        FilterKind::Mean,
    );
    let w = cfg.temporal.effective_window();
    assert_eq!(w, 3);
    let asp = cfg.selection_matrix(&g).unwrap();
    for t in 0..9 {
        let nb = neighborhood(&asp, 0, t).unwrap();
        let past = nb
            .members
            .iter()
            .filter(|m| m.1 < t)
            .map(|m| t - m.1)
            .max()
            .unwrap_or(0);
        let future = nb
            .members
            .iter()
            .filter(|m| m.1 > t)
            .map(|m| m.1 - t)
            .max()
            .unwrap_or(0);
        assert_eq!(past, w.min(t));
        assert_eq!(future, w.min(8 - t));
    }
}

#[test]
fn batch_and_sequential_mean_agree() {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(1..11);
        let t = r.random_range(2..11);
        let g = random_graph(n, 0.35, &mut r);
        let cfg = random_config(t, FilterKind::Mean, &mut r);
        let x = TimeVertexSignal::new(random_signal(n, t, &mut r)).unwrap();
        let seq = mean_filter_sequential(&x, &cfg, &g).unwrap();
        let batch = mean_filter_batch(&x, &cfg.selection_matrix(&g).unwrap()).unwrap();
        for (a, b) in seq.signal.values().iter().zip(batch.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1e-12, "max difference {worst}");
}

#[test]
fn median_matches_enumerated_neighborhoods() {
    let mut r = rng(12);
    for _ in 0..50 {
        let n = r.random_range(1..7);
        let t = r.random_range(2..7);
        let g = random_graph(n, 0.4, &mut r);
        let cfg = random_config(t, FilterKind::Median, &mut r);
        let x = TimeVertexSignal::new(random_signal(n, t, &mut r)).unwrap();
        let y = median_filter(&x, &cfg, &g, false).unwrap().signal;
        let spatial = dense_spatial(&g, &cfg);
        let w = scalar_window(&cfg);
        for ti in 0..t {
            for i in 0..n {
                let vals: Vec<f64> = brute_neighborhood(&spatial, w, cfg.include_self, t, i, ti)
                    .into_iter()
                    .map(|(j, s)| x.get(j, s))
                    .collect();
                assert_eq!(y.get(i, ti), sorted_median(&vals));
            }
        }
    }
}

#[test]
fn recursive_median_uses_filtered_past() {
    let mut r = rng(13);
    for _ in 0..20 {
        let n = r.random_range(1..6);
        let t = r.random_range(2..7);
        let g = random_graph(n, 0.4, &mut r);
        let cfg = random_config(t, FilterKind::Median, &mut r);
        let x = TimeVertexSignal::new(random_signal(n, t, &mut r)).unwrap();
        let y = median_filter(&x, &cfg, &g, true).unwrap().signal;
        let spatial = dense_spatial(&g, &cfg);
        let w = scalar_window(&cfg);
        // replay the recursion with a plain loop
        let mut expected = x.values().clone();
        for ti in 0..t {
            for i in 0..n {
                let vals: Vec<f64> = brute_neighborhood(&spatial, w, cfg.include_self, t, i, ti)
                    .into_iter()
                    .map(|(j, s)| {
                        if s < ti {
                            expected[[j, s]]
                        } else {
                            x.get(j, s)
                        }
                    })
                    .collect();
                expected[[i, ti]] = sorted_median(&vals);
            }
        }
        assert_eq!(y.values(), &expected);
    }
}

#[test]
fn constant_signal_is_fixed_point() {
    let g = p3();
    for kind in [FilterKind::Mean, FilterKind::Median] {
        let cfg = FilterConfig::new(
            KHopParams::new(2, 0.7, 0.2).unwrap(),
            TemporalParams::new(6, 2, 0.8, 0.2).unwrap(),
            kind,
        );
        let x = TimeVertexSignal::new(Array2::from_elem((3, 6), 4.25)).unwrap();
        let y = tvfilter::apply_filter(&x, &cfg, &g, false).unwrap();
        assert_eq!(y, x);
        let y = median_filter(&x, &cfg, &g, true).unwrap().signal;
        assert_eq!(y, x);
    }
}

#[test]
fn parallel_schedule_does_not_change_results() {
    let mut r = rng(14);
    let g = random_connected_graph(30, 0.1, &mut r);
    let cfg = random_config(20, FilterKind::Median, &mut r);
    let x = TimeVertexSignal::new(random_signal(30, 20, &mut r)).unwrap();
    let pool = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
    };
    let one = pool(1).install(|| median_filter(&x, &cfg, &g, false).unwrap());
    let four = pool(4).install(|| median_filter(&x, &cfg, &g, false).unwrap());
    assert_eq!(one, four);
    let one = pool(1).install(|| mean_filter_sequential(&x, &cfg, &g).unwrap());
    let four = pool(4).install(|| mean_filter_sequential(&x, &cfg, &g).unwrap());
    assert_eq!(one, four);
}

fn case() -> impl Strategy<Value = (u64, f64, f64)> {
    (0u64..100_000, -50.0f64..50.0, 0.01f64..20.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_output_within_neighborhood_range((seed, _, _) in case()) {
        let mut r = rng(seed);
        let n = r.random_range(1..8);
        let t = r.random_range(2..8);
        let g = random_graph(n, 0.4, &mut r);
        let cfg = random_config(t, FilterKind::Mean, &mut r);
        let x = TimeVertexSignal::new(random_signal(n, t, &mut r)).unwrap();
        let asp = cfg.selection_matrix(&g).unwrap();
        let y = mean_filter_batch(&x, &asp).unwrap();
        let m = median_filter(&x, &cfg, &g, false).unwrap().signal;
        for ti in 0..t {
            for i in 0..n {
                let vals = neighborhood(&asp, i, ti).unwrap().values(&x);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(y.get(i, ti) >= lo - 1e-12 && y.get(i, ti) <= hi + 1e-12);
                let med = m.get(i, ti);
                let is_member = vals.contains(&med);
                let is_midpoint = vals.iter().any(|a| vals.iter().any(|b| (a + b) / 2.0 == med));
                prop_assert!(is_member || is_midpoint);
            }
        }
    }

    #[test]
    fn filters_commute_with_shift_and_scale((seed, shift, scale) in case()) {
        let mut r = rng(seed);
        let n = r.random_range(1..8);
        let t = r.random_range(2..8);
        let g = random_graph(n, 0.4, &mut r);
        let x0 = random_signal(n, t, &mut r);
        let x = TimeVertexSignal::new(x0.clone()).unwrap();
        let shifted = TimeVertexSignal::new(x0.mapv(|v| v + shift)).unwrap();
        let scaled = TimeVertexSignal::new(x0.mapv(|v| v * scale)).unwrap();
        let negated = TimeVertexSignal::new(x0.mapv(|v| -v * scale)).unwrap();
        for kind in [FilterKind::Mean, FilterKind::Median] {
            let cfg: FilterConfig = random_config(t, kind, &mut r);
            let f = |s: &TimeVertexSignal| tvfilter::apply_filter(s, &cfg, &g, false).unwrap();
            let base = f(&x);
            let tol = 1e-9 * (1.0 + shift.abs() + scale);
            for ((a, b), (c, d)) in base.values().iter().zip(f(&shifted).values())
                .zip(f(&scaled).values().iter().zip(f(&negated).values()))
            {
                prop_assert!((a + shift - b).abs() <= tol);
                prop_assert!((a * scale - c).abs() <= tol);
                if kind == FilterKind::Mean {
                    prop_assert!((-a * scale - d).abs() <= tol);
                }
            }
        }
    }
}
