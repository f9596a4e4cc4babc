//! End-to-end forecasting: standardize, extrapolate, then alternate graph
//! learning and multi-head ADMM blocks with residual mixing.

mod centrality;
mod config;
mod extrapolate;
mod forecast;
mod metrics;
mod standardize;
mod tune;

pub use centrality::perron_centrality;
pub use config::{
    DataSection, GraphSection, HeadsSection, LayersSection, PipelineConfig, SolverSection, TunerSection,
    DEFAULT_RESIDUAL, PIPELINE_CG_ITERS, PIPELINE_CG_TOL,
};
pub use extrapolate::{initial_extrapolation, persistence_forecast, Extrapolation, TREND_SPAN};
pub use forecast::{evaluation, run_forecast, window_truth, Evaluation, Forecast, Forecaster};
pub use metrics::{huber_loss, metrics, Metrics};
pub use standardize::Standardizer;
pub use tune::{spsa_minimize, tune_spsa, ParamCodec, SpsaResult, TuneReport, MAX_TUNABLES, PARAM_FLOOR};
