//! Assembly of the undirected Laplacian, the random-walk digraph operators and
//! the symmetrized directed Laplacian.

use crate::error::{check_len, Error, Result};

use super::skeleton::{Layout, SpatialSkeleton, TemporalSkeleton};
use super::sparse::SparseMatrix;

/// Spatial edge weights, one vector per instant aligned with
/// [`SpatialSkeleton::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    pub per_instant: Vec<Vec<f64>>,
}

impl SpatialWeights {
    pub fn uniform(skel: &SpatialSkeleton, instants: usize, w: f64) -> Self {
        SpatialWeights {
            per_instant: vec![vec![w; skel.edges().len()]; instants],
        }
    }
}

/// Block-diagonal adjacency over instants.
pub fn assemble_undirected_adjacency(skel: &SpatialSkeleton, weights: &SpatialWeights) -> Result<SparseMatrix> {
    let layout = Layout::new(skel.station_count(), weights.per_instant.len());
    let mut trip = Vec::with_capacity(2 * skel.edges().len() * layout.instants);
    for (t, ws) in weights.per_instant.iter().enumerate() {
        check_len("spatial weights per instant", skel.edges().len(), ws.len())?;
        for (&(a, b), &w) in skel.edges().iter().zip(ws) {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!(
                    "spatial weight {w} on edge ({a}, {b}) at instant {t}"
                )));
            }
            if w == 0.0 {
                continue;
            }
            trip.push((layout.flat(a, t), layout.flat(b, t), w));
            trip.push((layout.flat(b, t), layout.flat(a, t), w));
        }
    }
    SparseMatrix::from_triplets(layout.len(), layout.len(), &trip)
}

/// `D - W` for a symmetric nonnegative adjacency.
pub fn laplacian_from_adjacency(w: &SparseMatrix) -> Result<SparseMatrix> {
    let n = w.rows();
    let mut trip = Vec::with_capacity(w.nnz() + n);
    for (r, deg) in w.row_sums().into_iter().enumerate() {
        if deg != 0.0 {
            trip.push((r, r, deg));
        }
    }
    for (r, c, v) in w.triplets() {
        trip.push((r, c, -v));
    }
    SparseMatrix::from_triplets_summed(n, n, &trip)
}

/// Block-diagonal combinatorial Laplacian `D^u - W^u` of the spatial graph.
pub fn assemble_undirected_laplacian(skel: &SpatialSkeleton, weights: &SpatialWeights) -> Result<SparseMatrix> {
    laplacian_from_adjacency(&assemble_undirected_adjacency(skel, weights)?)
}

/// Row-stochastic random-walk adjacency of a DAG plus its Laplacian.
///
/// Row `j` of `w_rd` holds the normalized weights of edges entering `j`.
/// Source nodes carry a unit self-loop, so their `l_rd` row is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalkDigraph {
    pub w_rd: SparseMatrix,
    pub l_rd: SparseMatrix,
    pub l_rd_t: SparseMatrix,
    pub sources: Vec<bool>,
}

impl RandomWalkDigraph {
    /// Assembles from directed edges `(from, to, weight)` on `n` nodes.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut in_degree = vec![0.0; n];
        let mut has_parent = vec![false; n];
        for &(from, to, w) in edges {
            if from >= n || to >= n {
                return Err(Error::invalid(format!("edge {from}->{to} outside 0..{n}")));
            }
            if from == to {
                return Err(Error::invalid(format!("explicit self-loop at node {to}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("directed weight {w} on {from}->{to}")));
            }
            in_degree[to] += w;
            has_parent[to] = true;
        }
        for (node, (&deg, &p)) in in_degree.iter().zip(&has_parent).enumerate() {
            if p && deg <= 0.0 {
                return Err(Error::DegenerateDegree { node });
            }
        }

        let mut w_trip = Vec::with_capacity(edges.len() + n);
        let mut l_trip = Vec::with_capacity(edges.len() + n);
        for (node, &p) in has_parent.iter().enumerate() {
            if p {
                l_trip.push((node, node, 1.0));
            } else {
                w_trip.push((node, node, 1.0));
            }
        }
        for &(from, to, w) in edges {
            let wn = w / in_degree[to];
            w_trip.push((to, from, wn));
            l_trip.push((to, from, -wn));
        }
        let w_rd = SparseMatrix::from_triplets_summed(n, n, &w_trip)?;
        let l_rd = SparseMatrix::from_triplets_summed(n, n, &l_trip)?;
        let l_rd_t = l_rd.transpose();
        Ok(RandomWalkDigraph {
            w_rd,
            l_rd,
            l_rd_t,
            sources: has_parent.into_iter().map(|p| !p).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// `(L_rd)^T L_rd` applied as two chained local products.
    pub fn apply_symmetrized_into(&self, x: &[f64], tmp: &mut [f64], out: &mut [f64]) {
        self.l_rd.mul_vec_into(x, tmp);
        self.l_rd_t.mul_vec_into(tmp, out);
    }

    /// Undirected copy of the DAG's edges, weight `(w_ij + w_ji) / 2`,
    /// self-loops dropped.
    pub fn symmetrized_adjacency(&self) -> Result<SparseMatrix> {
        let n = self.len();
        let mut trip = Vec::with_capacity(2 * self.w_rd.nnz());
        for (r, c, v) in self.w_rd.triplets() {
            if r != c {
                trip.push((r, c, 0.5 * v));
                trip.push((c, r, 0.5 * v));
            }
        }
        SparseMatrix::from_triplets_summed(n, n, &trip)
    }
}

/// Random-walk operators for the temporal skeleton with per-edge weights
/// aligned to [`TemporalSkeleton::edges`].
pub fn assemble_random_walk_digraph(skel: &TemporalSkeleton, weights: &[f64]) -> Result<RandomWalkDigraph> {
    check_len("temporal edge weights", skel.edges().len(), weights.len())?;
    let edges: Vec<_> = skel
        .edges()
        .iter()
        .zip(weights)
        .map(|(e, &w)| (e.from, e.to, w))
        .collect();
    RandomWalkDigraph::from_edges(skel.layout().len(), &edges)
}

/// `(L_rd)^T L_rd`.
pub fn symmetrized_dglr_matrix(l_rd: &SparseMatrix) -> Result<SparseMatrix> {
    if l_rd.rows() != l_rd.cols() {
        return Err(Error::DimensionMismatch {
            context: "symmetrized directed Laplacian",
            expected: l_rd.rows(),
            found: l_rd.cols(),
        });
    }
    let product = l_rd.transpose().matmul(l_rd)?;
    // Floating-point products can round the two triangles differently.
    let mut trip: Vec<_> = product.triplets().filter(|&(r, c, _)| r <= c).collect();
    let mirror: Vec<_> = trip
        .iter()
        .filter(|&&(r, c, _)| r != c)
        .map(|&(r, c, v)| (c, r, v))
        .collect();
    trip.extend(mirror);
    SparseMatrix::from_triplets(product.rows(), product.cols(), &trip)
}

/// Symmetric normalized Laplacian `I - D^{-1/2} W D^{-1/2}`; isolated nodes get a zero row.
pub fn normalized_laplacian(w: &SparseMatrix) -> Result<SparseMatrix> {
    let n = w.rows();
    let deg = w.row_sums();
    let mut trip = Vec::with_capacity(w.nnz() + n);
    for (i, &d) in deg.iter().enumerate() {
        if d > 0.0 {
            trip.push((i, i, 1.0));
        }
    }
    for (r, c, v) in w.triplets() {
        trip.push((r, c, -v / (deg[r] * deg[c]).sqrt()));
    }
    let m = SparseMatrix::from_triplets_summed(n, n, &trip)?;
    let mut sym: Vec<_> = m.triplets().filter(|&(r, c, _)| r <= c).collect();
    let mirror: Vec<_> = sym
        .iter()
        .filter(|&&(r, c, _)| r != c)
        .map(|&(r, c, v)| (c, r, v))
        .collect();
    sym.extend(mirror);
    SparseMatrix::from_triplets(n, n, &sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::skeleton::{build_temporal_skeleton, SpatialSkeleton};

    fn line(n: usize) -> RandomWalkDigraph {
        let edges: Vec<_> = (1..n).map(|j| (j - 1, j, 1.0)).collect();
        RandomWalkDigraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn two_node_laplacian() {
        let sk = SpatialSkeleton::from_neighbors(vec![vec![1], vec![0]]).unwrap();
        let l = assemble_undirected_laplacian(&sk, &SpatialWeights::uniform(&sk, 1, 1.0)).unwrap();
        assert_eq!(l.to_dense(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let z = assemble_undirected_laplacian(&sk, &SpatialWeights::uniform(&sk, 1, 0.0)).unwrap();
        assert_eq!(z.nnz(), 0);
        assert!(assemble_undirected_laplacian(&sk, &SpatialWeights::uniform(&sk, 1, -1.0)).is_err());
    }

    #[test]
    fn path4_laplacian_diagonal() {
        let sk = SpatialSkeleton::from_neighbors(vec![vec![1], vec![2], vec![3], vec![]]).unwrap();
        let l = assemble_undirected_laplacian(&sk, &SpatialWeights::uniform(&sk, 1, 1.0)).unwrap();
        let diag: Vec<_> = (0..4).map(|i| l.get(i, i)).collect();
        assert_eq!(diag, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(l.row_sums().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn single_node_self_loop() {
        let g = RandomWalkDigraph::from_edges(1, &[]).unwrap();
        assert_eq!(g.w_rd.to_dense(), vec![vec![1.0]]);
        assert_eq!(g.l_rd.to_dense(), vec![vec![0.0]]);
    }

    #[test]
    fn two_parent_normalization() {
        let g = RandomWalkDigraph::from_edges(3, &[(0, 2, 1.0), (1, 2, 3.0)]).unwrap();
        assert_eq!(g.w_rd.get(2, 0), 0.25);
        assert_eq!(g.w_rd.get(2, 1), 0.75);
        assert_eq!(g.sources, vec![true, true, false]);
    }

    #[test]
    fn degenerate_in_degree() {
        let err = RandomWalkDigraph::from_edges(2, &[(0, 1, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDegree { node: 1 }));
    }

    #[test]
    fn four_node_line_matrices() {
        let g = line(4);
        assert_eq!(
            g.w_rd.to_dense(),
            vec![
                vec![1.0, 0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ]
        );
        let cal = symmetrized_dglr_matrix(&g.l_rd).unwrap();
        assert_eq!(
            cal.to_dense(),
            vec![
                vec![1.0, -1.0, 0.0, 0.0],
                vec![-1.0, 2.0, -1.0, 0.0],
                vec![0.0, -1.0, 2.0, -1.0],
                vec![0.0, 0.0, -1.0, 1.0],
            ]
        );
    }

    #[test]
    fn fig2c_rank_one() {
        let g = RandomWalkDigraph::from_edges(3, &[(0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let cal = symmetrized_dglr_matrix(&g.l_rd).unwrap();
        let v = [-0.5, -0.5, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cal.get(i, j), v[i] * v[j]);
            }
        }
    }

    #[test]
    fn zero_l_rd_gives_zero() {
        let z = SparseMatrix::zeros(3, 3);
        assert_eq!(symmetrized_dglr_matrix(&z).unwrap().nnz(), 0);
        assert!(symmetrized_dglr_matrix(&SparseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn temporal_assembly_rows_stochastic() {
        let sk = build_temporal_skeleton(2, 5, 2).unwrap();
        let w: Vec<f64> = (0..sk.edges().len()).map(|i| 1.0 + i as f64).collect();
        let g = assemble_random_walk_digraph(&sk, &w).unwrap();
        for s in g.w_rd.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(assemble_random_walk_digraph(&sk, &w[1..]).is_err());
    }

    #[test]
    fn normalized_laplacian_of_edge() {
        let w = SparseMatrix::from_triplets(3, 3, &[(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        let l = normalized_laplacian(&w).unwrap();
        assert_eq!(l.get(0, 0), 1.0);
        assert_eq!(l.get(0, 1), -1.0);
        assert_eq!(l.get(2, 2), 0.0);
    }
}
