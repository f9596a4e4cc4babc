use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PhysicalGraph;
use crate::pipeline::Standardizer;

use super::table::{read_edges, SignalTable};

/// Chronological split fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::config("data.split", "ratios must be nonnegative"));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::config("data.split", "ratios must sum to 1"));
        }
        Ok(())
    }
}

fn default_stride() -> usize {
    3
}

fn default_history() -> usize {
    12
}

fn default_horizon() -> usize {
    12
}

/// Where a dataset lives and how it is cut into samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub signals: PathBuf,
    pub edges: PathBuf,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub split: SplitRatios,
    /// Observed steps per sample (`T + 1`).
    #[serde(default = "default_history")]
    pub history: usize,
    /// Forecast steps per sample (`S`).
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

impl DatasetSpec {
    pub fn new(signals: impl Into<PathBuf>, edges: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            signals: signals.into(),
            edges: edges.into(),
            stride: default_stride(),
            split: SplitRatios::default(),
            history: default_history(),
            horizon: default_horizon(),
        }
    }
}

/// One forecasting window.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Row of the first observed step in the source table.
    pub start: usize,
    /// `history + horizon` timestamps.
    pub timestamps: Vec<i64>,
    /// `observed[station][step]`.
    pub observed: Vec<Vec<f64>>,
    /// `target[station][step]`.
    pub target: Vec<Vec<f64>>,
}

impl Sample {
    pub fn stations(&self) -> usize {
        self.observed.len()
    }

    pub fn history(&self) -> usize {
        self.observed.first().map_or(0, Vec::len)
    }

    pub fn horizon(&self) -> usize {
        self.target.first().map_or(0, Vec::len)
    }

    /// Timestamps in units of the sampling interval.
    pub fn step_indices(&self) -> Vec<f64> {
        let dt = if self.timestamps.len() > 1 {
            (self.timestamps[1] - self.timestamps[0]).max(1)
        } else {
            1
        };
        self.timestamps.iter().map(|&t| (t / dt) as f64).collect()
    }
}

/// Samples split chronologically, plus the network and a train-fit standardizer.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
    pub graph: PhysicalGraph,
    pub standardizer: Standardizer,
}

/// `floor((steps - window) / stride) + 1`, or 0 when the series is too short.
pub fn window_count(steps: usize, window: usize, stride: usize) -> usize {
    if window == 0 || stride == 0 || steps < window {
        0
    } else {
        (steps - window) / stride + 1
    }
}

/// `(train, val, test)` counts: test and val take floors, train the remainder.
pub fn split_counts(n: usize, r: &SplitRatios) -> (usize, usize, usize) {
    let test = (n as f64 * r.test + 1e-9).floor() as usize;
    let valtest = ((n as f64 * (r.val + r.test) + 1e-9).floor() as usize).max(test);
    let valtest = valtest.min(n);
    (n - valtest, valtest - test, test)
}

/// Cuts windows of `history + horizon` rows every `stride` rows.
pub fn cut_samples(table: &SignalTable, history: usize, horizon: usize, stride: usize) -> Result<Vec<Sample>> {
    if history < 2 || horizon == 0 || stride == 0 {
        return Err(Error::invalid(format!(
            "need history >= 2, horizon >= 1, stride >= 1 (got {history}, {horizon}, {stride})"
        )));
    }
    let window = history + horizon;
    let count = window_count(table.steps(), window, stride);
    let n = table.stations();
    Ok((0..count)
        .map(|k| {
            let start = k * stride;
            let col = |s: usize, from: usize, len: usize| -> Vec<f64> {
                (from..from + len).map(|t| table.values[t][s]).collect()
            };
            Sample {
                start,
                timestamps: table.timestamps[start..start + window].to_vec(),
                observed: (0..n).map(|s| col(s, start, history)).collect(),
                target: (0..n).map(|s| col(s, start + history, horizon)).collect(),
            }
        })
        .collect())
}

/// Builds samples, splits them and fits the standardizer on the rows the training windows cover.
pub fn build_dataset(
    table: &SignalTable,
    graph: PhysicalGraph,
    history: usize,
    horizon: usize,
    stride: usize,
    split: &SplitRatios,
) -> Result<Dataset> {
    split.validate()?;
    table.validate()?;
    if graph.station_count() != table.stations() {
        return Err(Error::invalid(format!(
            "signal table has {} stations, edge list {}",
            table.stations(),
            graph.station_count()
        )));
    }
    let mut samples = cut_samples(table, history, horizon, stride)?;
    if samples.is_empty() {
        return Err(Error::invalid(format!(
            "{} steps are too few for windows of {}",
            table.steps(),
            history + horizon
        )));
    }
    let (ntr, nv, _) = split_counts(samples.len(), split);
    let test = samples.split_off(ntr + nv);
    let val = samples.split_off(ntr);
    let train = samples;
    let fit_rows = match (train.first(), train.last()) {
        (Some(a), Some(b)) => &table.values[a.start..b.start + history + horizon],
        _ => &table.values[..],
    };
    let standardizer = Standardizer::fit(fit_rows)?;
    Ok(Dataset {
        train,
        val,
        test,
        graph,
        standardizer,
    })
}

/// Reads both files named by `spec` and builds the dataset.
pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.stride == 0 {
        return Err(Error::config("data.stride", "must be at least 1"));
    }
    let table = SignalTable::read_csv(&spec.signals)?;
    let graph = read_edges(&spec.edges, table.stations())?;
    build_dataset(&table, graph, spec.history, spec.horizon, spec.stride, &spec.split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(steps: usize) -> SignalTable {
        SignalTable::new(
            (0..steps as i64).map(|t| t * 300).collect(),
            (0..steps).map(|t| vec![t as f64, 2.0 * t as f64]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(window_count(100, 18, 3), 28);
        assert_eq!(split_counts(28, &SplitRatios::default()), (17, 6, 5));
        assert_eq!(split_counts(1, &SplitRatios::default()), (1, 0, 0));
        assert_eq!(window_count(5, 6, 1), 0);
    }

    #[test]
    fn windows_and_split() {
        let pg = PhysicalGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let ds = build_dataset(&table(100), pg.clone(), 12, 6, 3, &SplitRatios::default()).unwrap();
        assert_eq!((ds.train.len(), ds.val.len(), ds.test.len()), (17, 6, 5));
        let s = &ds.val[0];
        assert_eq!(s.start, 51);
        assert_eq!(s.observed[1][0], 102.0);
        assert_eq!(s.target[0][0], 63.0);
        assert_eq!(s.timestamps.len(), 18);

        let one = build_dataset(&table(18), pg, 12, 6, 1, &SplitRatios::default()).unwrap();
        assert_eq!((one.train.len(), one.val.len(), one.test.len()), (1, 0, 0));
    }

    #[test]
    fn standardizer_uses_training_rows() {
        let pg = PhysicalGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let ds = build_dataset(&table(100), pg, 12, 6, 3, &SplitRatios::default()).unwrap();
        // Training windows cover rows 0..66.
        assert!((ds.standardizer.mean[0] - 32.5).abs() < 1e-12);
    }
}
