use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::admm::{CgSchedule, LayerParams, SolverMode};
use crate::error::{Error, Result};
use crate::io::SplitRatios;
use crate::learn::{MetricBank, DEFAULT_FEATURE_DIM, DEFAULT_SPATIAL_DIM};

use super::extrapolate::Extrapolation;

/// Graph construction and feature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    /// Spatial nearest neighbors per station.
    pub k: usize,
    /// Temporal window `W`.
    pub window: usize,
    /// Laplacian eigenmap coordinates per station.
    pub spatial_dim: usize,
    /// Feature dimension `K`.
    pub feature_dim: usize,
    /// `K x E` projection; defaults to selecting the first `K` embedding coordinates.
    pub projection: Option<Vec<Vec<f64>>>,
    pub aggregate_neighbors: bool,
    pub swish_beta: Option<f64>,
}

impl Default for GraphSection {
    fn default() -> Self {
        GraphSection {
            k: 6,
            window: 6,
            spatial_dim: DEFAULT_SPATIAL_DIM,
            feature_dim: DEFAULT_FEATURE_DIM,
            projection: None,
            aggregate_neighbors: false,
            swish_beta: None,
        }
    }
}

/// Inner solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub mode: SolverMode,
    pub cg: CgSchedule,
}

/// Default CG budget inside the pipeline.
pub const PIPELINE_CG_ITERS: usize = 40;
pub const PIPELINE_CG_TOL: f64 = 1e-6;

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            mode: SolverMode::Full,
            cg: CgSchedule::exact(PIPELINE_CG_ITERS, PIPELINE_CG_TOL),
        }
    }
}

/// Default residual coefficient for every block.
pub const DEFAULT_RESIDUAL: f64 = 0.5;

/// Unrolled depth and per-layer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayersSection {
    /// ADMM blocks `B`.
    pub blocks: usize,
    /// Layers per block `M`.
    pub layers: usize,
    /// `params[b]` holds either one entry shared by every layer of block `b`
    /// or one entry per layer. Empty means the standard initialization.
    pub params: Vec<Vec<LayerParams>>,
    /// Residual coefficients `p_b`; empty means [`DEFAULT_RESIDUAL`] everywhere.
    pub residual: Vec<f64>,
}

impl Default for LayersSection {
    fn default() -> Self {
        LayersSection {
            blocks: 5,
            layers: 25,
            params: Vec::new(),
            residual: Vec::new(),
        }
    }
}

/// Multi-head attention settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadsSection {
    pub count: usize,
    /// Merge weights `a_h`; empty means `1 / H` each.
    pub merge: Vec<f64>,
    /// Metric replicas; `None` means the standard initialization.
    pub metrics: Option<MetricBank>,
}

impl Default for HeadsSection {
    fn default() -> Self {
        HeadsSection {
            count: 4,
            merge: Vec::new(),
            metrics: None,
        }
    }
}

/// SPSA settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunerSection {
    pub iterations: usize,
    pub seed: u64,
    /// Step-size numerator `a`.
    pub step: f64,
    /// Perturbation size `c`.
    pub perturbation: f64,
    /// Stability offset `A`.
    pub offset: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Largest per-coordinate move in one iteration.
    pub max_step: f64,
    /// Validation samples used per loss evaluation; 0 means all.
    pub batch: usize,
    /// Also tune the unrolled CG step sizes and momenta.
    pub tune_cg: bool,
}

impl Default for TunerSection {
    fn default() -> Self {
        TunerSection {
            iterations: 60,
            seed: 0,
            step: 1.0,
            perturbation: 0.1,
            offset: 5.0,
            alpha: 0.602,
            gamma: 0.101,
            max_step: 0.2,
            batch: 6,
            tune_cg: false,
        }
    }
}

/// Windowing, split, initial guess and metric settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Observed steps per sample (`T + 1`).
    pub history: usize,
    /// Forecast steps per sample (`S`).
    pub horizon: usize,
    pub stride: usize,
    pub split: SplitRatios,
    pub extrapolation: Extrapolation,
    /// Targets with `|t|` at or below this are left out of MAPE.
    pub mape_floor: f64,
    pub huber_delta: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            history: 12,
            horizon: 12,
            stride: 3,
            split: SplitRatios::default(),
            extrapolation: Extrapolation::LinearTrend,
            mape_floor: 1.0,
            huber_delta: 1.0,
        }
    }
}

/// Full pipeline configuration, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub graph: GraphSection,
    pub solver: SolverSection,
    pub layers: LayersSection,
    pub heads: HeadsSection,
    pub tuner: TunerSection,
    pub data: DataSection,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Instants per sample (`T + S + 1`).
    pub fn instants(&self) -> usize {
        self.data.history + self.data.horizon
    }

    /// Checks everything that does not depend on the station count.
    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        if g.k == 0 {
            return Err(Error::config("graph.k", "must be at least 1"));
        }
        if g.feature_dim == 0 {
            return Err(Error::config("graph.feature_dim", "must be at least 1"));
        }
        if let Some(b) = g.swish_beta {
            if !b.is_finite() {
                return Err(Error::config("graph.swish_beta", "must be finite"));
            }
        }
        let d = &self.data;
        if d.history < 2 {
            return Err(Error::config("data.history", "must be at least 2"));
        }
        if d.horizon == 0 {
            return Err(Error::config("data.horizon", "must be at least 1"));
        }
        if d.stride == 0 {
            return Err(Error::config("data.stride", "must be at least 1"));
        }
        d.split.validate()?;
        if g.window == 0 || g.window >= self.instants() {
            return Err(Error::config(
                "graph.window",
                format!("must lie in 1..{}", self.instants()),
            ));
        }
        if !(d.huber_delta > 0.0) {
            return Err(Error::config("data.huber_delta", "must be positive"));
        }
        if !(d.mape_floor >= 0.0) {
            return Err(Error::config("data.mape_floor", "must be nonnegative"));
        }
        if let Extrapolation::SeasonalNaive { season } = d.extrapolation {
            if season == 0 || season > d.history {
                return Err(Error::config(
                    "data.extrapolation.season",
                    format!("must lie in 1..={}", d.history),
                ));
            }
        }
        let l = &self.layers;
        if l.layers == 0 && l.blocks > 0 {
            return Err(Error::config("layers.layers", "must be at least 1"));
        }
        if !l.params.is_empty() {
            if l.params.len() != l.blocks {
                return Err(Error::config(
                    "layers.params",
                    format!("has {} blocks, expected {}", l.params.len(), l.blocks),
                ));
            }
            for (b, block) in l.params.iter().enumerate() {
                if block.len() != 1 && block.len() != l.layers {
                    return Err(Error::config(
                        format!("layers.params[{b}]"),
                        format!("needs 1 or {} entries, has {}", l.layers, block.len()),
                    ));
                }
                for p in block {
                    p.validate()
                        .map_err(|e| Error::config(format!("layers.params[{b}]"), e.to_string()))?;
                }
            }
        }
        if !l.residual.is_empty() && l.residual.len() != l.blocks {
            return Err(Error::config(
                "layers.residual",
                format!("has {} entries, expected {}", l.residual.len(), l.blocks),
            ));
        }
        if l.residual.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::config("layers.residual", "entries must lie in [0, 1]"));
        }
        let h = &self.heads;
        if h.count == 0 {
            return Err(Error::config("heads.count", "must be at least 1"));
        }
        if !h.merge.is_empty() && h.merge.len() != h.count {
            return Err(Error::config(
                "heads.merge",
                format!("has {} entries, expected {}", h.merge.len(), h.count),
            ));
        }
        if h.merge.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("heads.merge", "entries must be finite"));
        }
        if let Some(bank) = &h.metrics {
            if bank.head_count() != h.count {
                return Err(Error::config(
                    "heads.metrics",
                    format!("has {} heads, expected {}", bank.head_count(), h.count),
                ));
            }
            bank.validate(g.feature_dim, self.instants(), g.window)
                .map_err(|e| Error::config("heads.metrics", e.to_string()))?;
        }
        if let CgSchedule::Exact { tol, .. } = self.solver.cg {
            if !(tol >= 0.0) {
                return Err(Error::config("solver.cg.tol", "must be nonnegative"));
            }
        }
        if let CgSchedule::Unrolled { alphas, betas } = &self.solver.cg {
            if alphas.len() != betas.len() {
                return Err(Error::config("solver.cg", "alphas and betas differ in length"));
            }
        }
        let t = &self.tuner;
        if !(t.step > 0.0 && t.perturbation > 0.0 && t.max_step > 0.0) {
            return Err(Error::config(
                "tuner",
                "step, perturbation and max_step must be positive",
            ));
        }
        Ok(())
    }

    /// Per-block, per-layer parameters with defaults filled in.
    pub fn resolved_params(&self, stations: usize) -> Vec<Vec<LayerParams>> {
        let l = &self.layers;
        (0..l.blocks)
            .map(|b| match l.params.get(b) {
                Some(v) if v.len() == 1 => vec![v[0]; l.layers],
                Some(v) => v.clone(),
                None => vec![LayerParams::initial(stations, self.instants()); l.layers],
            })
            .collect()
    }

    pub fn resolved_residual(&self) -> Vec<f64> {
        if self.layers.residual.is_empty() {
            vec![DEFAULT_RESIDUAL; self.layers.blocks]
        } else {
            self.layers.residual.clone()
        }
    }

    pub fn resolved_merge(&self) -> Vec<f64> {
        if self.heads.merge.is_empty() {
            vec![1.0 / self.heads.count as f64; self.heads.count]
        } else {
            self.heads.merge.clone()
        }
    }

    pub fn resolved_metrics(&self) -> MetricBank {
        self.heads.metrics.clone().unwrap_or_else(|| {
            MetricBank::initial(
                self.graph.feature_dim,
                self.instants(),
                self.graph.window,
                self.heads.count,
            )
        })
    }
}
