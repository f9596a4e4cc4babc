use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Point-forecast error summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    /// Percent; over targets with `|t| > mape_floor`, 0 when none qualify.
    pub mape: f64,
}

/// RMSE, MAE and MAPE of `pred` against `target`.
pub fn metrics(pred: &[f64], target: &[f64], mape_floor: f64) -> Result<Metrics> {
    check_len("prediction", target.len(), pred.len())?;
    if pred.is_empty() {
        return Err(Error::invalid("metrics of an empty forecast"));
    }
    let n = pred.len() as f64;
    let (mut se, mut ae, mut pe, mut pc) = (0.0, 0.0, 0.0, 0usize);
    for (p, t) in pred.iter().zip(target) {
        let e = p - t;
        se += e * e;
        ae += e.abs();
        if t.abs() > mape_floor {
            pe += e.abs() / t.abs();
            pc += 1;
        }
    }
    Ok(Metrics {
        rmse: (se / n).sqrt(),
        mae: ae / n,
        mape: if pc == 0 { 0.0 } else { 100.0 * pe / pc as f64 },
    })
}

/// Mean Huber loss with threshold `delta`.
pub fn huber_loss(pred: &[f64], target: &[f64], delta: f64) -> Result<f64> {
    check_len("prediction", target.len(), pred.len())?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let e = (p - t).abs();
            if e <= delta {
                0.5 * e * e
            } else {
                delta * (e - 0.5 * delta)
            }
        })
        .sum();
    Ok(total / pred.len() as f64)
}
