use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form initial guess for the future block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Extrapolation {
    /// Repeat the last observation.
    HoldLast,
    /// Least-squares line through the last [`TREND_SPAN`] observations.
    #[default]
    LinearTrend,
    /// Repeat the observation one season earlier.
    SeasonalNaive { season: usize },
}

/// Observations used by the linear-trend fit.
pub const TREND_SPAN: usize = 6;

impl FromStr for Extrapolation {
    type Err = Error;

    /// `hold_last`, `linear_trend` or `seasonal_naive:<season>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hold_last" => Ok(Extrapolation::HoldLast),
            "linear_trend" => Ok(Extrapolation::LinearTrend),
            _ => {
                if let Some(rest) = s.strip_prefix("seasonal_naive:") {
                    let season = rest
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad season in {s:?}")))?;
                    Ok(Extrapolation::SeasonalNaive { season })
                } else {
                    Err(Error::invalid(format!("unknown extrapolation method {s:?}")))
                }
            }
        }
    }
}

impl fmt::Display for Extrapolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extrapolation::HoldLast => f.write_str("hold_last"),
            Extrapolation::LinearTrend => f.write_str("linear_trend"),
            Extrapolation::SeasonalNaive { season } => write!(f, "seasonal_naive:{season}"),
        }
    }
}

/// Extends each station row of `observed` by `horizon` steps; the observed prefix is copied.
pub fn initial_extrapolation(observed: &[Vec<f64>], horizon: usize, method: Extrapolation) -> Result<Vec<Vec<f64>>> {
    observed
        .iter()
        .map(|row| {
            let n = row.len();
            if n == 0 {
                return Err(Error::invalid("empty observation row"));
            }
            let mut out = row.clone();
            out.reserve(horizon);
            match method {
                Extrapolation::HoldLast => out.extend(std::iter::repeat_n(row[n - 1], horizon)),
                Extrapolation::LinearTrend => {
                    let span = TREND_SPAN.min(n);
                    let tail = &row[n - span..];
                    let tm = (span as f64 - 1.0) / 2.0;
                    let ym = tail.iter().sum::<f64>() / span as f64;
                    let (mut sxy, mut sxx) = (0.0, 0.0);
                    for (i, y) in tail.iter().enumerate() {
                        let dx = i as f64 - tm;
                        sxy += dx * (y - ym);
                        sxx += dx * dx;
                    }
                    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
                    for h in 1..=horizon {
                        out.push(ym + slope * (span as f64 - 1.0 - tm + h as f64));
                    }
                }
                Extrapolation::SeasonalNaive { season } => {
                    if season == 0 || season > n {
                        return Err(Error::invalid(format!("season {season} must lie in 1..={n}")));
                    }
                    for h in 0..horizon {
                        let mut j = n + h;
                        while j >= n {
                            j -= season;
                        }
                        out.push(row[j]);
                    }
                }
            }
            Ok(out)
        })
        .collect()
}

/// Hold-last forecast of the future block only.
pub fn persistence_forecast(observed: &[Vec<f64>], horizon: usize) -> Vec<Vec<f64>> {
    observed
        .iter()
        .map(|r| vec![*r.last().expect("nonempty row"); horizon])
        .collect()
}
