//! Graph smoothness priors (GLR, DGLR, DGTV) and the full reconstruction objective.

mod spectrum;

pub use spectrum::{spectrum_dense, spectrum_dense_with_limit, Spectrum, DENSE_LIMIT};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::{MixedGraph, RandomWalkDigraph, SparseMatrix};

/// Weights of the three regularization terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorWeights {
    pub mu_u: f64,
    pub mu_d2: f64,
    pub mu_d1: f64,
}

impl PriorWeights {
    pub fn new(mu_u: f64, mu_d2: f64, mu_d1: f64) -> Result<Self> {
        for (name, v) in [("mu_u", mu_u), ("mu_d2", mu_d2), ("mu_d1", mu_d1)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(PriorWeights { mu_u, mu_d2, mu_d1 })
    }
}

fn quadratic_form(a: &SparseMatrix, x: &[f64]) -> Result<f64> {
    let ax = a.mul_vec(x)?;
    Ok(x.iter().zip(&ax).map(|(a, b)| a * b).sum())
}

/// Graph Laplacian regularizer `x^T L x`.
pub fn glr(x: &[f64], l_u: &SparseMatrix) -> Result<f64> {
    quadratic_form(l_u, x)
}

/// Directed graph Laplacian regularizer `||L_rd x||^2`.
pub fn dglr(x: &[f64], digraph: &RandomWalkDigraph) -> Result<f64> {
    let r = digraph.l_rd.mul_vec(x)?;
    Ok(r.iter().map(|v| v * v).sum())
}

/// Directed graph total variation `sum_{j not a source} |(L_rd x)_j|`.
pub fn dgtv(x: &[f64], digraph: &RandomWalkDigraph) -> Result<f64> {
    let r = digraph.l_rd.mul_vec(x)?;
    Ok(r.iter()
        .zip(&digraph.sources)
        .filter(|(_, &s)| !s)
        .map(|(v, _)| v.abs())
        .sum())
}

/// Squared fidelity `||y - Hx||^2` on the observed entries.
pub fn fidelity(x: &[f64], y: &[f64], graph: &MixedGraph) -> Result<f64> {
    check_len("signal", graph.len(), x.len())?;
    check_len("observations", graph.observed_count(), y.len())?;
    Ok(graph.sample(x).iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum())
}

/// `||y - Hx||^2 + mu_u GLR + mu_d2 DGLR + mu_d1 DGTV`.
pub fn objective(x: &[f64], y: &[f64], graph: &MixedGraph, w: &PriorWeights) -> Result<f64> {
    let mut total = fidelity(x, y, graph)?;
    if w.mu_u != 0.0 {
        total += w.mu_u * glr(x, graph.l_u())?;
    }
    if w.mu_d2 != 0.0 {
        total += w.mu_d2 * dglr(x, graph.digraph())?;
    }
    if w.mu_d1 != 0.0 {
        total += w.mu_d1 * dgtv(x, graph.digraph())?;
    }
    Ok(total)
}

/// Frequency response `1 / (1 + c λ)` of the graph low-pass filters.
pub fn lowpass_response(lambda: f64, c: f64) -> f64 {
    1.0 / (1.0 + c * lambda)
}
