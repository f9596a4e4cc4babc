use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Per-station z-scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits on `rows[step][station]`. Constant stations get std 1.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n == 0 {
            return Err(Error::invalid("cannot fit a standardizer on no data"));
        }
        let count = rows.len() as f64;
        let mut mean = vec![0.0; n];
        for r in rows {
            check_len("standardizer row", n, r.len())?;
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; n];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .enumerate()
            .map(|(s, v)| {
                let sd = (v / count).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    log::warn!("station {s} is constant over the fit range; std set to 1");
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn identity(stations: usize) -> Self {
        Standardizer {
            mean: vec![0.0; stations],
            std: vec![1.0; stations],
        }
    }

    pub fn stations(&self) -> usize {
        self.mean.len()
    }

    pub fn forward(&self, station: usize, v: f64) -> f64 {
        (v - self.mean[station]) / self.std[station]
    }

    pub fn inverse(&self, station: usize, v: f64) -> f64 {
        v * self.std[station] + self.mean[station]
    }

    /// Applies [`forward`](Self::forward) to `rows[station][step]`.
    pub fn forward_rows(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .enumerate()
            .map(|(s, r)| r.iter().map(|&v| self.forward(s, v)).collect())
            .collect()
    }

    /// Applies [`inverse`](Self::inverse) to `rows[station][step]`.
    pub fn inverse_rows(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .enumerate()
            .map(|(s, r)| r.iter().map(|&v| self.inverse(s, v)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_and_roundtrip() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.forward(0, 3.0), 1.0);
        let v = 17.25;
        assert!((s.inverse(0, s.forward(0, v)) - v).abs() < 1e-12);
        assert!(Standardizer::fit(&[]).is_err());
    }
}
