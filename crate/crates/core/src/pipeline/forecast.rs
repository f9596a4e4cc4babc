use rayon::prelude::*;

use crate::admm::{admm_block, LayerParams};
use crate::error::{check_len, Error, Result};
use crate::graph::{
    build_spatial_skeleton, build_temporal_skeleton, Layout, MixedGraph, PhysicalGraph, SpatialSkeleton,
    TemporalSkeleton,
};
use crate::io::Sample;
use crate::learn::{embed, head_graph, FeatureMap, MetricBank, SpatialEigenmap};

use super::config::PipelineConfig;
use super::extrapolate::{initial_extrapolation, persistence_forecast};
use super::metrics::{huber_loss, metrics, Metrics};
use super::standardize::Standardizer;

/// Output of one forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// `predicted[station][step]` over the horizon, raw units.
    pub predicted: Vec<Vec<f64>>,
    /// Whole reconstructed window, time-major, raw units.
    pub reconstruction: Vec<f64>,
}

/// Everything a forecast needs that does not depend on the sample.
#[derive(Debug, Clone)]
pub struct Forecaster {
    config: PipelineConfig,
    layout: Layout,
    spatial: SpatialSkeleton,
    temporal: TemporalSkeleton,
    eigenmap: SpatialEigenmap,
    feature_map: FeatureMap,
    bank: MetricBank,
    standardizer: Standardizer,
    params: Vec<Vec<LayerParams>>,
    residual: Vec<f64>,
    merge: Vec<f64>,
    /// `head_source[h]` is the first head with identical metrics.
    head_source: Vec<usize>,
}

impl Forecaster {
    pub fn new(config: &PipelineConfig, graph: &PhysicalGraph, standardizer: Standardizer) -> Result<Self> {
        config.validate()?;
        let n = graph.station_count();
        check_len("standardizer stations", n, standardizer.stations())?;
        let layout = Layout::new(n, config.instants());
        let spatial = build_spatial_skeleton(graph, config.graph.k)?;
        let temporal = build_temporal_skeleton(n, layout.instants, config.graph.window)?;
        let eigenmap = SpatialEigenmap::new(graph, config.graph.spatial_dim)?;
        let embedding_dim = 1 + config.graph.spatial_dim + crate::learn::TEMPORAL_DIM;
        let mut feature_map = match &config.graph.projection {
            Some(p) => FeatureMap {
                projection: p.clone(),
                aggregate_neighbors: false,
                swish_beta: None,
            },
            None => FeatureMap::select_first(config.graph.feature_dim, embedding_dim)
                .map_err(|e| Error::config("graph.feature_dim", e.to_string()))?,
        };
        feature_map.aggregate_neighbors = config.graph.aggregate_neighbors;
        feature_map.swish_beta = config.graph.swish_beta;
        feature_map
            .validate(embedding_dim)
            .map_err(|e| Error::config("graph.projection", e.to_string()))?;
        if feature_map.feature_dim() != config.graph.feature_dim {
            return Err(Error::config(
                "graph.projection",
                format!(
                    "has {} rows, expected {}",
                    feature_map.feature_dim(),
                    config.graph.feature_dim
                ),
            ));
        }
        let bank = config.resolved_metrics();
        let head_source = (0..bank.heads.len())
            .map(|h| (0..h).find(|&g| bank.heads[g] == bank.heads[h]).unwrap_or(h))
            .collect();
        Ok(Forecaster {
            params: config.resolved_params(n),
            residual: config.resolved_residual(),
            merge: config.resolved_merge(),
            config: config.clone(),
            layout,
            spatial,
            temporal,
            eigenmap,
            feature_map,
            bank,
            standardizer,
            head_source,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn spatial(&self) -> &SpatialSkeleton {
        &self.spatial
    }

    pub fn temporal(&self) -> &TemporalSkeleton {
        &self.temporal
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    fn check_sample(&self, sample: &Sample) -> Result<()> {
        check_len("sample stations", self.layout.stations, sample.stations())?;
        check_len("sample history", self.config.data.history, sample.history())?;
        check_len("sample timestamps", self.layout.instants, sample.timestamps.len())?;
        Ok(())
    }

    /// Standardized initial signal (time-major) and the observations `y`.
    pub fn initial_signal(&self, sample: &Sample) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_sample(sample)?;
        let z = self.standardizer.forward_rows(&sample.observed);
        let ext = initial_extrapolation(&z, self.config.data.horizon, self.config.data.extrapolation)?;
        let n = self.layout.stations;
        let mut x = vec![0.0; self.layout.len()];
        for (s, row) in ext.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                x[t * n + s] = v;
            }
        }
        let y = x[..self.config.data.history * n].to_vec();
        Ok((x, y))
    }

    /// Head graphs learned from the current signal `x` (time-major, standardized).
    pub fn graphs(&self, x: &[f64], sample: &Sample) -> Result<Vec<Option<MixedGraph>>> {
        let emb = embed(x, self.layout, &self.eigenmap, &sample.step_indices())?;
        let feats = self.feature_map.apply(&emb, &self.spatial, self.layout)?;
        self.bank
            .heads
            .iter()
            .enumerate()
            .map(|(h, metrics)| {
                if self.head_source[h] != h {
                    return Ok(None);
                }
                head_graph(&feats, &self.spatial, &self.temporal, metrics, self.config.data.history)
                    .map(Some)
                    .map_err(|e| Error::Block {
                        block: 0,
                        head: h,
                        source: Box::new(e),
                    })
            })
            .collect()
    }

    /// Runs the full unrolled pipeline on one sample.
    pub fn forecast(&self, sample: &Sample) -> Result<Forecast> {
        let (mut x, y) = self.initial_signal(sample)?;
        let sched = &self.config.solver.cg;
        let mode = self.config.solver.mode;
        for b in 0..self.config.layers.blocks {
            let graphs = self.graphs(&x, sample).map_err(|e| match e {
                Error::Block { head, source, .. } => Error::Block { block: b, head, source },
                other => other,
            })?;
            let mut solved: Vec<Option<Vec<f64>>> = vec![None; graphs.len()];
            for (h, g) in graphs.iter().enumerate() {
                if let Some(g) = g {
                    let out = admm_block(&x, &y, g, &self.params[b], sched, mode).map_err(|e| Error::Block {
                        block: b,
                        head: h,
                        source: Box::new(e),
                    })?;
                    solved[h] = Some(out);
                }
            }
            let mut merged = vec![0.0; x.len()];
            for (h, a) in self.merge.iter().enumerate() {
                let xh = solved[self.head_source[h]].as_ref().expect("source head solved");
                for (m, v) in merged.iter_mut().zip(xh) {
                    *m += a * v;
                }
            }
            let p = self.residual[b];
            for (xi, m) in x.iter_mut().zip(&merged) {
                *xi = p * m + (1.0 - p) * *xi;
            }
        }
        let n = self.layout.stations;
        let hist = self.config.data.history;
        let reconstruction: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| self.standardizer.inverse(i % n, v))
            .collect();
        let predicted = (0..n)
            .map(|s| {
                (0..self.config.data.horizon)
                    .map(|h| reconstruction[(hist + h) * n + s])
                    .collect()
            })
            .collect();
        Ok(Forecast {
            predicted,
            reconstruction,
        })
    }

    /// Forecasts every sample, in parallel.
    pub fn forecast_all(&self, samples: &[Sample]) -> Result<Vec<Forecast>> {
        samples.par_iter().map(|s| self.forecast(s)).collect()
    }

    /// Pipeline and hold-last metrics plus the whole-window Huber loss.
    pub fn evaluate(&self, samples: &[Sample]) -> Result<Evaluation> {
        let forecasts = self.forecast_all(samples)?;
        evaluation(
            &forecasts,
            samples,
            self.config.data.mape_floor,
            self.config.data.huber_delta,
        )
    }
}

/// Aggregate scores over a sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub model: Metrics,
    pub persistence: Metrics,
    /// Mean Huber loss over whole reconstructed windows.
    pub huber: f64,
}

/// Future block flattened station-major.
fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

/// Ground truth of the whole window, time-major.
pub fn window_truth(sample: &Sample) -> Vec<f64> {
    let n = sample.stations();
    let (h, s) = (sample.history(), sample.horizon());
    let mut out = vec![0.0; n * (h + s)];
    for st in 0..n {
        for t in 0..h {
            out[t * n + st] = sample.observed[st][t];
        }
        for t in 0..s {
            out[(h + t) * n + st] = sample.target[st][t];
        }
    }
    out
}

pub fn evaluation(forecasts: &[Forecast], samples: &[Sample], mape_floor: f64, huber_delta: f64) -> Result<Evaluation> {
    check_len("forecasts", samples.len(), forecasts.len())?;
    let mut pred = Vec::new();
    let mut base = Vec::new();
    let mut truth = Vec::new();
    let mut rec = Vec::new();
    let mut whole = Vec::new();
    for (f, s) in forecasts.iter().zip(samples) {
        pred.extend(flatten(&f.predicted));
        base.extend(flatten(&persistence_forecast(&s.observed, s.horizon())));
        truth.extend(flatten(&s.target));
        rec.extend_from_slice(&f.reconstruction);
        whole.extend(window_truth(s));
    }
    Ok(Evaluation {
        model: metrics(&pred, &truth, mape_floor)?,
        persistence: metrics(&base, &truth, mape_floor)?,
        huber: huber_loss(&rec, &whole, huber_delta)?,
    })
}

/// One-shot forecast of a single sample.
pub fn run_forecast(
    sample: &Sample,
    config: &PipelineConfig,
    graph: &PhysicalGraph,
    standardizer: &Standardizer,
) -> Result<Vec<Vec<f64>>> {
    Ok(Forecaster::new(config, graph, standardizer.clone())?
        .forecast(sample)?
        .predicted)
}
