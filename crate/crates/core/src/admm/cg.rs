//! Conjugate gradient, both classical and with stored (unrolled) step and momentum schedules.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Upper clamp for unrolled step sizes.
pub const MAX_UNROLLED_ALPHA: f64 = 0.8;
/// Fill value for unrolled `α` and `β` before any tuning.
pub const DEFAULT_UNROLLED_FILL: f64 = 0.08;
pub const DEFAULT_UNROLLED_ITERS: usize = 8;
pub const DEFAULT_EXACT_TOL: f64 = 1e-10;

/// A symmetric linear map `x -> A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// How each CG sub-solve is run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CgSchedule {
    /// Classical CG until `||Ax - b|| <= tol` or `max_iters` steps.
    Exact { max_iters: usize, tol: f64 },
    /// Exactly `alphas.len()` steps with stored step sizes and momenta.
    Unrolled { alphas: Vec<f64>, betas: Vec<f64> },
}

impl Default for CgSchedule {
    fn default() -> Self {
        CgSchedule::Exact {
            max_iters: 1000,
            tol: DEFAULT_EXACT_TOL,
        }
    }
}

impl CgSchedule {
    pub fn exact(max_iters: usize, tol: f64) -> Self {
        CgSchedule::Exact { max_iters, tol }
    }

    /// Unrolled schedule; `α` clamped to `[0, 0.8]`, `β` to `[0, ∞)`.
    pub fn unrolled(alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        check_len("unrolled CG momenta", alphas.len(), betas.len())?;
        Ok(CgSchedule::Unrolled { alphas, betas }.clamped())
    }

    pub fn unrolled_default() -> Self {
        CgSchedule::Unrolled {
            alphas: vec![DEFAULT_UNROLLED_FILL; DEFAULT_UNROLLED_ITERS],
            betas: vec![DEFAULT_UNROLLED_FILL; DEFAULT_UNROLLED_ITERS],
        }
    }

    pub fn clamped(self) -> Self {
        match self {
            CgSchedule::Unrolled { alphas, betas } => CgSchedule::Unrolled {
                alphas: alphas
                    .into_iter()
                    .map(|a| {
                        if a.is_nan() {
                            0.0
                        } else {
                            a.clamp(0.0, MAX_UNROLLED_ALPHA)
                        }
                    })
                    .collect(),
                betas: betas
                    .into_iter()
                    .map(|b| if b.is_nan() { 0.0 } else { b.max(0.0) })
                    .collect(),
            },
            exact => exact,
        }
    }
}

/// Final iterate of a CG run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Norm of the recursively updated residual at exit.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` from the initial guess `x0`.
pub fn cg_solve(op: &dyn LinearOperator, b: &[f64], x0: &[f64], sched: &CgSchedule) -> Result<CgSolution> {
    let mut x = x0.to_vec();
    let (iterations, residual) = cg_in_place(op, b, &mut x, sched)?;
    Ok(CgSolution {
        x,
        iterations,
        residual,
    })
}

/// In-place variant: `x` holds the initial guess on entry and the iterate on exit.
pub fn cg_in_place(op: &dyn LinearOperator, b: &[f64], x: &mut [f64], sched: &CgSchedule) -> Result<(usize, f64)> {
    let n = op.dim();
    check_len("CG right-hand side", n, b.len())?;
    check_len("CG initial guess", n, x.len())?;

    let mut ap = vec![0.0; n];
    op.apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    if !rr.is_finite() {
        return Err(Error::CgDiverged { iteration: 0 });
    }

    match sched {
        CgSchedule::Exact { max_iters, tol } => {
            let tol2 = tol * tol;
            let mut k = 0;
            while k < *max_iters && rr > tol2 {
                op.apply(&p, &mut ap);
                let pap = dot(&p, &ap);
                if !(pap > 0.0 && pap.is_finite()) {
                    return Err(Error::CgDiverged { iteration: k });
                }
                let alpha = rr / pap;
                for i in 0..n {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * ap[i];
                }
                let rr_next = dot(&r, &r);
                if !rr_next.is_finite() {
                    return Err(Error::CgDiverged { iteration: k });
                }
                let beta = rr_next / rr;
                for i in 0..n {
                    p[i] = r[i] + beta * p[i];
                }
                rr = rr_next;
                k += 1;
            }
            Ok((k, rr.sqrt()))
        }
        CgSchedule::Unrolled { alphas, betas } => {
            for (k, (&alpha, &beta)) in alphas.iter().zip(betas).enumerate() {
                op.apply(&p, &mut ap);
                for i in 0..n {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * ap[i];
                    p[i] = r[i] + beta * p[i];
                }
                rr = dot(&r, &r);
                if !rr.is_finite() {
                    return Err(Error::CgDiverged { iteration: k });
                }
            }
            Ok((alphas.len(), rr.sqrt()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: Vec<f64>) -> FnOperator<impl Fn(&[f64], &mut [f64])> {
        FnOperator::new(d.len(), move |x: &[f64], out: &mut [f64]| {
            for i in 0..x.len() {
                out[i] = d[i] * x[i];
            }
        })
    }

    #[test]
    fn identity_one_step() {
        let op = diag(vec![1.0; 4]);
        let b = [1.0, -2.0, 3.0, 0.5];
        let s = cg_solve(&op, &b, &[0.0; 4], &CgSchedule::exact(10, 1e-12)).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(s.x, b.to_vec());
    }

    #[test]
    fn diagonal_three_steps() {
        let op = diag(vec![1.0, 2.0, 4.0]);
        let s = cg_solve(&op, &[1.0; 3], &[0.0; 3], &CgSchedule::exact(3, 1e-12)).unwrap();
        assert!(s.iterations <= 3);
        for (got, want) in s.x.iter().zip([1.0, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut ax = vec![0.0; 3];
        op.apply(&s.x, &mut ax);
        let res: f64 = ax.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-12);
    }

    #[test]
    fn unrolled_clamps_and_runs_fixed_steps() {
        let sched = CgSchedule::unrolled(vec![2.0, -1.0, 0.3], vec![-0.5, 0.1, 0.2]).unwrap();
        match &sched {
            CgSchedule::Unrolled { alphas, betas } => {
                assert_eq!(alphas, &vec![0.8, 0.0, 0.3]);
                assert_eq!(betas, &vec![0.0, 0.1, 0.2]);
            }
            _ => unreachable!(),
        }
        let op = diag(vec![1.0, 1.0]);
        let s = cg_solve(&op, &[1.0, 1.0], &[0.0, 0.0], &sched).unwrap();
        assert_eq!(s.iterations, 3);
        assert!(CgSchedule::unrolled(vec![0.1], vec![]).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let op = diag(vec![-1.0, 1.0]);
        let err = cg_solve(&op, &[1.0, 0.0], &[0.0, 0.0], &CgSchedule::exact(5, 1e-12)).unwrap_err();
        assert!(matches!(err, Error::CgDiverged { iteration: 0 }));
        let big = diag(vec![1e308, 1e308]);
        let sched = CgSchedule::Unrolled {
            alphas: vec![1e10; 3],
            betas: vec![0.0; 3],
        };
        assert!(cg_solve(&big, &[1e300, 1e300], &[0.0, 0.0], &sched).is_err());
    }
}
