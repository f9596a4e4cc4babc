//! Product-graph indexing, sparse storage and operator assembly.

mod assemble;
mod skeleton;
mod sparse;

pub use assemble::{
    assemble_random_walk_digraph, assemble_undirected_adjacency, assemble_undirected_laplacian,
    laplacian_from_adjacency, normalized_laplacian, symmetrized_dglr_matrix, RandomWalkDigraph, SpatialWeights,
};
pub use skeleton::{
    build_spatial_skeleton, build_temporal_skeleton, Layout, PhysicalGraph, SpaceTimeIndex, SpatialSkeleton,
    TemporalEdge, TemporalSkeleton,
};
pub use sparse::SparseMatrix;

use crate::error::{check_len, Result};

/// Operators that can be applied to a space-time signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// Spatial combinatorial Laplacian `L^u`.
    Undirected,
    /// Directed random-walk Laplacian `L_rd`.
    RandomWalk,
    /// `(L_rd)^T`.
    RandomWalkTransposed,
    /// `(L_rd)^T L_rd`, as two chained products.
    Symmetrized,
    /// Normalized Laplacian of the undirected copy of the temporal graph.
    TemporalUndirected,
}

/// Undirected spatial graph plus directed temporal DAG over one sample window,
/// with every operator the solver touches pre-assembled.
#[derive(Debug, Clone)]
pub struct MixedGraph {
    layout: Layout,
    w_u: SparseMatrix,
    l_u: SparseMatrix,
    digraph: RandomWalkDigraph,
    cal_l_rd: SparseMatrix,
    l_n: SparseMatrix,
    observed: Vec<bool>,
}

impl MixedGraph {
    /// Assembles every operator from skeletons and edge weights. The first
    /// `observed_instants` instants are marked observed.
    pub fn assemble(
        spatial: &SpatialSkeleton,
        temporal: &TemporalSkeleton,
        weights_u: &SpatialWeights,
        weights_d: &[f64],
        observed_instants: usize,
    ) -> Result<Self> {
        let layout = temporal.layout();
        check_len("spatial skeleton stations", layout.stations, spatial.station_count())?;
        check_len("spatial weight instants", layout.instants, weights_u.per_instant.len())?;
        let w_u = assemble_undirected_adjacency(spatial, weights_u)?;
        let digraph = assemble_random_walk_digraph(temporal, weights_d)?;
        Self::from_parts(layout, w_u, digraph, layout.prefix_mask(observed_instants))
    }

    /// Builds from an explicit spatial adjacency and digraph.
    pub fn from_parts(
        layout: Layout,
        w_u: SparseMatrix,
        digraph: RandomWalkDigraph,
        observed: Vec<bool>,
    ) -> Result<Self> {
        let n = layout.len();
        check_len("spatial adjacency", n, w_u.rows())?;
        check_len("digraph nodes", n, digraph.len())?;
        check_len("observation mask", n, observed.len())?;
        let l_u = laplacian_from_adjacency(&w_u)?;
        let cal_l_rd = symmetrized_dglr_matrix(&digraph.l_rd)?;
        let l_n = normalized_laplacian(&digraph.symmetrized_adjacency()?)?;
        Ok(MixedGraph {
            layout,
            w_u,
            l_u,
            digraph,
            cal_l_rd,
            l_n,
            observed,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn spatial_adjacency(&self) -> &SparseMatrix {
        &self.w_u
    }

    pub fn l_u(&self) -> &SparseMatrix {
        &self.l_u
    }

    pub fn digraph(&self) -> &RandomWalkDigraph {
        &self.digraph
    }

    pub fn w_rd(&self) -> &SparseMatrix {
        &self.digraph.w_rd
    }

    pub fn l_rd(&self) -> &SparseMatrix {
        &self.digraph.l_rd
    }

    pub fn cal_l_rd(&self) -> &SparseMatrix {
        &self.cal_l_rd
    }

    pub fn l_n(&self) -> &SparseMatrix {
        &self.l_n
    }

    /// `H^T H` as a boolean diagonal.
    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    /// `H x`.
    pub fn sample(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.observed)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .collect()
    }

    /// `H^T y`.
    pub fn upsample(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("observations", self.observed_count(), y.len())?;
        let mut out = vec![0.0; self.len()];
        let mut it = y.iter();
        for (o, &m) in out.iter_mut().zip(&self.observed) {
            if m {
                *o = *it.next().expect("length checked");
            }
        }
        Ok(out)
    }

    /// Spatial adjacency of one instant as an `N x N` matrix.
    pub fn spatial_slice(&self, instant: usize) -> Result<SparseMatrix> {
        let n = self.layout.stations;
        if instant >= self.layout.instants {
            return Err(crate::Error::invalid(format!(
                "instant {instant} outside 0..{}",
                self.layout.instants
            )));
        }
        let base = instant * n;
        let trip: Vec<_> = (base..base + n)
            .flat_map(|r| self.w_u.row(r).map(move |(c, v)| (r - base, c - base, v)))
            .collect();
        SparseMatrix::from_triplets(n, n, &trip)
    }

    /// In-place application used by the solver; `tmp` is scratch of the same length.
    pub fn apply_into(&self, op: Operator, x: &[f64], tmp: &mut [f64], out: &mut [f64]) {
        match op {
            Operator::Undirected => self.l_u.mul_vec_into(x, out),
            Operator::RandomWalk => self.digraph.l_rd.mul_vec_into(x, out),
            Operator::RandomWalkTransposed => self.digraph.l_rd_t.mul_vec_into(x, out),
            Operator::Symmetrized => self.digraph.apply_symmetrized_into(x, tmp, out),
            Operator::TemporalUndirected => self.l_n.mul_vec_into(x, out),
        }
    }
}

/// Applies one of the graph operators to a space-time signal.
pub fn apply_operator(graph: &MixedGraph, op: Operator, x: &[f64]) -> Result<Vec<f64>> {
    check_len("operator input", graph.len(), x.len())?;
    let mut tmp = vec![0.0; graph.len()];
    let mut out = vec![0.0; graph.len()];
    graph.apply_into(op, x, &mut tmp, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MixedGraph {
        let sp = SpatialSkeleton::from_neighbors(vec![vec![1], vec![0]]).unwrap();
        let tm = build_temporal_skeleton(2, 3, 2).unwrap();
        let wu = SpatialWeights {
            per_instant: vec![vec![1.0], vec![2.0], vec![0.5]],
        };
        let wd: Vec<f64> = (0..tm.edges().len()).map(|i| 1.0 + i as f64).collect();
        MixedGraph::assemble(&sp, &tm, &wu, &wd, 2).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let g = tiny();
        let ones = vec![1.0; g.len()];
        for op in [Operator::Undirected, Operator::RandomWalk, Operator::Symmetrized] {
            let y = apply_operator(&g, op, &ones).unwrap();
            assert!(y.iter().all(|v| v.abs() < 1e-14), "{op:?}");
        }
        assert!(apply_operator(&g, Operator::Undirected, &[1.0]).is_err());
    }

    #[test]
    fn mask_and_sampling() {
        let g = tiny();
        assert_eq!(g.observed_count(), 4);
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert_eq!(g.sample(&x), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            g.upsample(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0, 0.0, 0.0]
        );
        let s = g.spatial_slice(1).unwrap();
        assert_eq!(s.get(0, 1), 2.0);
    }
}
