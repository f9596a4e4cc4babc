mod common;

use common::*;
use mixgraph::graph::{
    apply_operator, build_spatial_skeleton, build_temporal_skeleton, symmetrized_dglr_matrix, Layout, Operator,
    PhysicalGraph, RandomWalkDigraph, SparseMatrix, SpatialSkeleton,
};
use mixgraph::learn::{directed_weights, mahalanobis, undirected_weights, Features, MetricMatrix, SpatialEigenmap};
use mixgraph::pipeline::perron_centrality;
use mixgraph::priors::{dglr, dgtv, glr, spectrum_dense};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn line(n: usize) -> RandomWalkDigraph {
    let edges: Vec<_> = (1..n).map(|j| (j - 1, j, 1.0)).collect();
    RandomWalkDigraph::from_edges(n, &edges).unwrap()
}

#[test]
fn directed_line_symmetrized_laplacian_is_the_path_laplacian() {
    for n in 2..=32 {
        let d = line(n);
        let cal = dense(&symmetrized_dglr_matrix(&d.l_rd).unwrap());
        let mut path = DMatrix::zeros(n, n);
        for j in 1..n {
            path[(j, j)] += 1.0;
            path[(j - 1, j - 1)] += 1.0;
            path[(j, j - 1)] = -1.0;
            path[(j - 1, j)] = -1.0;
        }
        assert_eq!(max_abs(&(cal - path)), 0.0, "N = {n}");
    }
}

#[test]
fn four_node_line_matches_printed_matrices() {
    let d = line(4);
    #[rustfmt::skip]
    let w = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    ]);
    #[rustfmt::skip]
    let l = DMatrix::from_row_slice(4, 4, &[
         0.0,  0.0,  0.0, 0.0,
        -1.0,  1.0,  0.0, 0.0,
         0.0, -1.0,  1.0, 0.0,
         0.0,  0.0, -1.0, 1.0,
    ]);
    #[rustfmt::skip]
    let cal = DMatrix::from_row_slice(4, 4, &[
         1.0, -1.0,  0.0,  0.0,
        -1.0,  2.0, -1.0,  0.0,
         0.0, -1.0,  2.0, -1.0,
         0.0,  0.0, -1.0,  1.0,
    ]);
    assert_eq!(dense(&d.w_rd), w);
    assert_eq!(dense(&d.l_rd), l);
    assert_eq!(dense(&symmetrized_dglr_matrix(&d.l_rd).unwrap()), cal);
}

#[test]
fn dglr_keeps_edge_direction() {
    let converging = RandomWalkDigraph::from_edges(3, &[(0, 2, 1.0), (1, 2, 1.0)]).unwrap();
    let diverging = RandomWalkDigraph::from_edges(3, &[(2, 0, 1.0), (2, 1, 1.0)]).unwrap();
    let x = [2.0, 0.0, 1.0];
    assert_eq!(dglr(&x, &converging).unwrap(), 0.0);
    assert_eq!(dglr(&x, &diverging).unwrap(), 2.0);
    assert_eq!(dglr(&[5.0; 3], &diverging).unwrap(), 0.0);
}

#[test]
fn assembled_operators_match_dense_construction() {
    let mut r = rng(41);
    for _ in 0..20 {
        let shape = Shape {
            stations: r.gen_range(2..=6),
            instants: r.gen_range(2..=7),
            window: 1,
            observed: 1,
        };
        let shape = Shape {
            window: r.gen_range(1..shape.instants),
            observed: r.gen_range(1..=shape.instants),
            ..shape
        };
        let inst = instance(&mut r, &shape, true);
        let g = &inst.graph;
        assert!(max_abs(&(dense(g.spatial_adjacency()) - &inst.w_u)) < 1e-15);
        assert!(max_abs(&(dense(g.l_u()) - &inst.l_u)) < 1e-14);
        assert!(max_abs(&(dense(g.w_rd()) - &inst.w_rd)) < 1e-15);
        assert!(max_abs(&(dense(g.l_rd()) - &inst.l_rd)) < 1e-15);
        assert!(max_abs(&(dense(g.cal_l_rd()) - &inst.cal)) < 1e-13);
        assert!(max_abs(&(dense(g.l_n()) - &inst.l_n)) < 1e-13);

        let x = random_vec(&mut r, inst.len());
        let xv = DVector::from_column_slice(&x);
        let lx = &inst.l_rd * &xv;
        assert!((glr(&x, g.l_u()).unwrap() - xv.dot(&(&inst.l_u * &xv))).abs() < 1e-10);
        assert!((dglr(&x, g.digraph()).unwrap() - lx.norm_squared()).abs() < 1e-10);
        assert!((dgtv(&x, g.digraph()).unwrap() - lx.lp_norm(1)).abs() < 1e-10);
        for (op, m) in [
            (Operator::Undirected, &inst.l_u),
            (Operator::RandomWalk, &inst.l_rd),
            (Operator::Symmetrized, &inst.cal),
            (Operator::TemporalUndirected, &inst.l_n),
        ] {
            let got = DVector::from_vec(apply_operator(g, op, &x).unwrap());
            assert!((got - m * &xv).amax() < 1e-12);
        }
        let lt = DVector::from_vec(apply_operator(g, Operator::RandomWalkTransposed, &x).unwrap());
        assert!((lt - inst.l_rd.transpose() * &xv).amax() < 1e-12);
    }
}

#[test]
fn learned_weights_follow_the_attention_formulas() {
    let mut r = rng(42);
    let (n, instants, window) = (4, 4, 2);
    let spatial = SpatialSkeleton::from_neighbors(vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![0, 2]]).unwrap();
    let temporal = build_temporal_skeleton(n, instants, window).unwrap();
    let k = 3;
    let rows: Vec<Vec<f64>> = (0..n * instants).map(|_| random_vec(&mut r, k)).collect();
    let feats = Features::from_rows(&rows).unwrap();
    let factor =
        |r: &mut rand_chacha::ChaCha8Rng| MetricMatrix::new((0..k).map(|_| random_vec(r, k)).collect()).unwrap();
    let mu: Vec<MetricMatrix> = (0..instants).map(|_| factor(&mut r)).collect();
    let md: Vec<MetricMatrix> = (0..window).map(|_| factor(&mut r)).collect();
    let dist = |i: usize, j: usize, m: &MetricMatrix| {
        let full = DMatrix::from_fn(k, k, |a, b| m.metric()[a][b]);
        let d = DVector::from_column_slice(&rows[i]) - DVector::from_column_slice(&rows[j]);
        d.dot(&(full * &d))
    };

    let wu = undirected_weights(&feats, &spatial, &mu).unwrap();
    for t in 0..instants {
        let flat = |s: usize| t * n + s;
        let z = |i: usize| -> f64 {
            spatial
                .neighbors(i)
                .iter()
                .map(|&l| (-dist(flat(i), flat(l), &mu[t])).exp())
                .sum()
        };
        for (e, &(a, b)) in spatial.edges().iter().enumerate() {
            let want = (-dist(flat(a), flat(b), &mu[t])).exp() / (z(a).sqrt() * z(b).sqrt());
            assert!((wu.per_instant[t][e] - want).abs() < 1e-12);
        }
    }

    let wd = directed_weights(&feats, &temporal, &md).unwrap();
    for node in 0..n * instants {
        let range = temporal.incoming(node);
        if range.is_empty() {
            continue;
        }
        let edges = &temporal.edges()[range.clone()];
        let denom: f64 = edges.iter().map(|e| (-dist(e.to, e.from, &md[e.lag - 1])).exp()).sum();
        let mut total = 0.0;
        for (e, &w) in edges.iter().zip(&wd[range]) {
            let want = (-dist(e.to, e.from, &md[e.lag - 1])).exp() / denom;
            assert!((w - want).abs() < 1e-12);
            total += w;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mahalanobis_is_a_psd_quadratic_form() {
    let mut r = rng(43);
    for _ in 0..50 {
        let k = r.gen_range(1..=6);
        let m = MetricMatrix::new((0..k).map(|_| random_vec(&mut r, k)).collect()).unwrap();
        let full = DMatrix::from_fn(k, k, |a, b| m.metric()[a][b]);
        assert!(full.clone().symmetric_eigenvalues().min() > -1e-10);
        assert!((&full - full.transpose()).amax() == 0.0);
        let a = random_vec(&mut r, k);
        let b = random_vec(&mut r, k);
        let d = mahalanobis(&a, &b, &m).unwrap();
        let dv = DVector::from_column_slice(&a) - DVector::from_column_slice(&b);
        assert!((d - dv.dot(&(&full * &dv))).abs() < 1e-10);
        assert!((d - mahalanobis(&b, &a, &m).unwrap()).abs() < 1e-12);
        assert!(d >= 0.0);
    }
}

#[test]
fn softmax_weight_falls_as_feature_distance_grows() {
    let temporal = build_temporal_skeleton(1, 3, 2).unwrap();
    let m = vec![MetricMatrix::scaled_identity(1, 1.0); 2];
    // Node 2 has parents 1 (lag 1) and 0 (lag 2).
    let near = |gap: f64| {
        let feats = Features::from_rows(&[vec![gap], vec![0.1], vec![0.0]]).unwrap();
        let w = directed_weights(&feats, &temporal, &m).unwrap();
        let range = temporal.incoming(2);
        let edges = &temporal.edges()[range.clone()];
        let pos = edges.iter().position(|e| e.from == 0).unwrap();
        w[range][pos]
    };
    let mut prev = f64::INFINITY;
    for gap in [0.0, 0.2, 0.5, 1.0, 2.0] {
        let w = near(gap);
        assert!(w < prev);
        prev = w;
    }
}

#[test]
fn perron_vector_of_a_star() {
    let trip: Vec<_> = (1..5).flat_map(|l| [(0, l, 1.0), (l, 0, 1.0)]).collect();
    let w = SparseMatrix::from_triplets(5, 5, &trip).unwrap();
    let p = perron_centrality(&w).unwrap();
    // Adjacency eigenvector for λ = 2: centre 2, leaves 1, normalized to unit sum.
    assert!((p[0] - 2.0 / 6.0).abs() < 1e-8);
    for v in &p[1..] {
        assert!((v - 1.0 / 6.0).abs() < 1e-8);
    }
    let disconnected = SparseMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    assert!(perron_centrality(&disconnected).is_err());
}

#[test]
fn eigenmap_matches_dense_eigenvectors() {
    let pg = PhysicalGraph::new(5, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 4, 3.0)]).unwrap();
    let em = SpatialEigenmap::new(&pg, 3).unwrap();
    let mut lap = DMatrix::zeros(5, 5);
    for &(a, b, _) in pg.edges() {
        lap[(a, a)] += 1.0;
        lap[(b, b)] += 1.0;
        lap[(a, b)] -= 1.0;
        lap[(b, a)] -= 1.0;
    }
    let mut vals: Vec<f64> = lap.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    // Every coordinate column is an eigenvector of the unit-weight Laplacian.
    for k in 0..3 {
        let v = DVector::from_iterator(5, (0..5).map(|s| em.station(s)[k]));
        assert!((v.norm() - 1.0).abs() < 1e-9);
        let rayleigh = v.dot(&(&lap * &v));
        assert!((&lap * &v - &v * rayleigh).amax() < 1e-8);
        assert!(rayleigh > 1e-9 && rayleigh <= vals[k + 2] + 1e-9);
    }
}

#[test]
fn knn_skeleton_keeps_cheapest_neighbors() {
    let pg = PhysicalGraph::new(4, vec![(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0), (1, 2, 5.0)]).unwrap();
    let sk = build_spatial_skeleton(&pg, 1).unwrap();
    // 0 picks 1, 1 picks 0, 2 picks 0, 3 picks 0.
    assert_eq!(sk.edges(), &[(0, 1), (0, 2), (0, 3)]);
}

#[test]
fn spectrum_of_assembled_operators_is_nonnegative() {
    let mut r = rng(44);
    for _ in 0..5 {
        let inst = tiny_instance(&mut r, false);
        for m in [inst.graph.l_u(), inst.graph.cal_l_rd(), inst.graph.l_n()] {
            let s = spectrum_dense(m).unwrap();
            let want = dense(m).symmetric_eigenvalues();
            let mut want: Vec<f64> = want.iter().copied().collect();
            want.sort_by(f64::total_cmp);
            for (a, b) in s.eigenvalues.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!(s.eigenvalues[0] > -1e-10);
        }
    }
}

#[test]
fn mixed_graph_layout_is_time_major() {
    let layout = Layout::new(3, 4);
    assert_eq!(layout.flat(2, 1), 5);
    let idx = layout.index(7);
    assert_eq!((idx.station, idx.instant), (1, 2));
    assert_eq!(layout.prefix_mask(2).iter().filter(|&&b| b).count(), 6);
}
