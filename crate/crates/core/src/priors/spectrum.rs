use crate::error::{Error, Result};
use crate::graph::SparseMatrix;

/// Default size cap for dense eigendecompositions.
pub const DENSE_LIMIT: usize = 512;

/// Eigen-pairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`; unit norm, mutually orthogonal.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(response(λ_k)) V^T v`.
    pub fn filter(&self, response: impl Fn(f64) -> f64, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (lambda, vec) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let coeff: f64 = vec.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() * response(*lambda);
            for (o, a) in out.iter_mut().zip(vec) {
                *o += coeff * a;
            }
        }
        out
    }

    /// Flips each eigenvector so its first entry with magnitude above `eps` is positive.
    pub fn canonicalize_signs(&mut self, eps: f64) {
        for v in &mut self.eigenvectors {
            if let Some(&first) = v.iter().find(|a| a.abs() > eps) {
                if first < 0.0 {
                    v.iter_mut().for_each(|a| *a = -*a);
                }
            }
        }
    }
}

/// Dense symmetric eigendecomposition by cyclic Jacobi rotations, capped at
/// [`DENSE_LIMIT`] rows. Diagnostic use only.
pub fn spectrum_dense(a: &SparseMatrix) -> Result<Spectrum> {
    spectrum_dense_with_limit(a, DENSE_LIMIT)
}

pub fn spectrum_dense_with_limit(a: &SparseMatrix, limit: usize) -> Result<Spectrum> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::invalid(format!("{}x{} matrix is not square", n, a.cols())));
    }
    if n > limit {
        return Err(Error::invalid(format!(
            "dense eigendecomposition limited to {limit} rows, got {n}"
        )));
    }
    let asym = a.asymmetry();
    let scale = a.triplets().map(|(_, _, v)| v.abs()).fold(0.0, f64::max).max(1.0);
    if asym > 1e-12 * scale {
        return Err(Error::invalid(format!("matrix is not symmetric (gap {asym:.3e})")));
    }
    Ok(jacobi_eigen(a.to_dense()))
}

fn off_norm(m: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigen(mut m: Vec<Vec<f64>>) -> Spectrum {
    let n = m.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let frob = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = 1e-12 * frob.max(1.0);

    for _sweep in 0..100 {
        if off_norm(&m) <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in m.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p][k], m[q][k]);
                    m[p][k] = c * pk - s * qk;
                    m[q][k] = s * pk + c * qk;
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[a][a].total_cmp(&m[b][b]));
    Spectrum {
        eigenvalues: order.iter().map(|&k| m[k][k]).collect(),
        eigenvectors: order.iter().map(|&k| v.iter().map(|row| row[k]).collect()).collect(),
    }
}
