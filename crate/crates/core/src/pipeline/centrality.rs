use crate::error::{Error, Result};
use crate::graph::SparseMatrix;

const TOL: f64 = 1e-10;
const MAX_ITERS: usize = 100_000;

/// Perron vector of a connected nonnegative symmetric adjacency, unit 1-norm.
///
/// Power iteration runs on `W + I`, which has the same eigenvectors as `W`
/// and no ties in magnitude at the top of its spectrum.
pub fn perron_centrality(w: &SparseMatrix) -> Result<Vec<f64>> {
    let n = w.rows();
    if n == 0 || w.cols() != n {
        return Err(Error::invalid(format!(
            "need a nonempty square matrix, got {n}x{}",
            w.cols()
        )));
    }
    if w.triplets().any(|(_, _, v)| !(v >= 0.0)) {
        return Err(Error::invalid("adjacency has negative entries"));
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for (v, wt) in w.row(u) {
            if wt > 0.0 && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::invalid("adjacency is disconnected"));
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        w.mul_vec_into(&v, &mut next);
        for (a, b) in next.iter_mut().zip(&v) {
            *a += b;
        }
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|a| *a /= norm);
        residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut v, &mut next);
        if residual < TOL {
            return Ok(v);
        }
    }
    Err(Error::NotConverged { residual })
}
