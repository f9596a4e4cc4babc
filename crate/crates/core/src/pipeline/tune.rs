use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admm::{CgSchedule, LayerParams};
use crate::error::{Error, Result};
use crate::graph::PhysicalGraph;
use crate::io::Sample;

use super::config::{PipelineConfig, TunerSection};
use super::forecast::Forecaster;
use super::standardize::Standardizer;

/// Floor applied to every tuned μ and ρ.
pub const PARAM_FLOOR: f64 = 1e-6;
/// Largest tunable vector accepted.
pub const MAX_TUNABLES: usize = 100;

/// Outcome of an SPSA run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsaResult {
    pub best_theta: Vec<f64>,
    pub best_loss: f64,
    pub initial_loss: f64,
    /// Best-seen loss after each iteration.
    pub trace: Vec<f64>,
}

/// Simultaneous-perturbation stochastic approximation from `theta0`.
///
/// Every evaluated point counts toward the best-seen record. A non-finite loss
/// rejects the iteration and halves the perturbation.
pub fn spsa_minimize(
    theta0: &[f64],
    settings: &TunerSection,
    mut loss: impl FnMut(&[f64]) -> f64,
) -> Result<SpsaResult> {
    let p = theta0.len();
    let initial_loss = loss(theta0);
    if !initial_loss.is_finite() {
        return Err(Error::invalid("loss at the starting point is not finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut theta = theta0.to_vec();
    let mut best_theta = theta.clone();
    let mut best_loss = initial_loss;
    let mut c_scale = 1.0;
    let mut trace = Vec::with_capacity(settings.iterations);
    for k in 0..settings.iterations {
        let ak = settings.step / (k as f64 + 1.0 + settings.offset).powf(settings.alpha);
        let ck = c_scale * settings.perturbation / (k as f64 + 1.0).powf(settings.gamma);
        let delta: Vec<f64> = (0..p).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
        let lp = loss(&plus);
        let lm = loss(&minus);
        for (l, cand) in [(lp, &plus), (lm, &minus)] {
            if l.is_finite() && l < best_loss {
                best_loss = l;
                best_theta = cand.clone();
            }
        }
        if lp.is_finite() && lm.is_finite() {
            let diff = (lp - lm) / (2.0 * ck);
            for (t, d) in theta.iter_mut().zip(&delta) {
                *t -= (ak * diff / d).clamp(-settings.max_step, settings.max_step);
            }
        } else {
            log::warn!("SPSA iteration {k}: non-finite loss, halving perturbation");
            c_scale *= 0.5;
        }
        log::debug!("SPSA iteration {k}: loss+ {lp:.6} loss- {lm:.6} best {best_loss:.6}");
        trace.push(best_loss);
    }
    Ok(SpsaResult {
        best_theta,
        best_loss,
        initial_loss,
        trace,
    })
}

/// Maps between a pipeline config and the tuned vector.
///
/// Layout: six log-multipliers per block (μ_u, μ_d2, μ_d1, ρ, ρ_u, ρ_d),
/// two log metric scales per head, `a_h` per head, `p_b` per block, then the
/// unrolled CG `α` and `β` when enabled. All entries are offsets from the base
/// config, so the zero vector reproduces it.
#[derive(Debug, Clone)]
pub struct ParamCodec {
    base: PipelineConfig,
    stations: usize,
    cg_len: usize,
}

impl ParamCodec {
    pub fn new(base: &PipelineConfig, stations: usize) -> Result<Self> {
        let cg_len = match (&base.solver.cg, base.tuner.tune_cg) {
            (CgSchedule::Unrolled { alphas, .. }, true) => alphas.len(),
            _ => 0,
        };
        let codec = ParamCodec {
            base: base.clone(),
            stations,
            cg_len,
        };
        if codec.dim() > MAX_TUNABLES {
            return Err(Error::config(
                "tuner",
                format!("{} tunables exceed the limit of {MAX_TUNABLES}", codec.dim()),
            ));
        }
        Ok(codec)
    }

    pub fn dim(&self) -> usize {
        let b = self.base.layers.blocks;
        let h = self.base.heads.count;
        6 * b + 2 * h + h + b + 2 * self.cg_len
    }

    pub fn zero(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    pub fn decode(&self, theta: &[f64]) -> PipelineConfig {
        let mut cfg = self.base.clone();
        let b = cfg.layers.blocks;
        let h = cfg.heads.count;
        let mut it = theta.iter().copied();
        let mut next = || it.next().expect("theta has codec dimension");
        let scale = |v: f64, s: f64| (v * s.exp()).max(PARAM_FLOOR);
        let base_params = self.base.resolved_params(self.stations);
        cfg.layers.params = base_params
            .into_iter()
            .map(|block| {
                let s: Vec<f64> = (0..6).map(|_| next()).collect();
                block
                    .into_iter()
                    .map(|p| LayerParams {
                        mu_u: scale(p.mu_u, s[0]),
                        mu_d2: scale(p.mu_d2, s[1]),
                        mu_d1: scale(p.mu_d1, s[2]),
                        rho: scale(p.rho, s[3]),
                        rho_u: scale(p.rho_u, s[4]),
                        rho_d: scale(p.rho_d, s[5]),
                    })
                    .collect()
            })
            .collect();
        let mut bank = self.base.resolved_metrics();
        for head in bank.heads.iter_mut() {
            let (su, sd) = (next().exp(), next().exp());
            *head = head.scaled(su, sd);
        }
        cfg.heads.metrics = Some(bank);
        cfg.heads.merge = self.base.resolved_merge().into_iter().map(|a| a + next()).collect();
        cfg.layers.residual = self
            .base
            .resolved_residual()
            .into_iter()
            .map(|p| (p + next()).clamp(0.0, 1.0))
            .collect();
        if self.cg_len > 0 {
            if let CgSchedule::Unrolled { alphas, betas } = &self.base.solver.cg {
                let a = alphas.iter().map(|v| v + next()).collect();
                let bt = betas.iter().map(|v| v + next()).collect();
                cfg.solver.cg = CgSchedule::Unrolled { alphas: a, betas: bt }.clamped();
            }
        }
        debug_assert_eq!(cfg.layers.params.len(), b);
        debug_assert_eq!(cfg.heads.merge.len(), h);
        cfg
    }
}

/// Result of tuning a pipeline.
#[derive(Debug, Clone)]
pub struct TuneReport {
    pub config: PipelineConfig,
    pub initial_loss: f64,
    pub best_loss: f64,
    pub trace: Vec<f64>,
}

/// Tunes `config` by SPSA on the validation Huber loss over `val`, or over
/// `config.tuner.batch` samples spread evenly across it.
pub fn tune_spsa(
    config: &PipelineConfig,
    graph: &PhysicalGraph,
    standardizer: &Standardizer,
    val: &[Sample],
) -> Result<TuneReport> {
    config.validate()?;
    if val.is_empty() {
        return Err(Error::invalid("tuning needs at least one validation sample"));
    }
    let batch: Vec<Sample> = match config.tuner.batch {
        0 => val.to_vec(),
        b if b >= val.len() => val.to_vec(),
        b => (0..b).map(|i| val[i * val.len() / b].clone()).collect(),
    };
    let codec = ParamCodec::new(config, graph.station_count())?;
    let loss = |theta: &[f64]| -> f64 {
        let cfg = codec.decode(theta);
        match Forecaster::new(&cfg, graph, standardizer.clone()).and_then(|f| f.evaluate(&batch)) {
            Ok(ev) => ev.huber,
            Err(e) => {
                log::warn!("candidate rejected: {e}");
                f64::NAN
            }
        }
    };
    let res = spsa_minimize(&codec.zero(), &config.tuner, loss)?;
    let best = if res.best_loss < res.initial_loss {
        codec.decode(&res.best_theta)
    } else {
        config.clone()
    };
    Ok(TuneReport {
        config: best,
        initial_loss: res.initial_loss,
        best_loss: res.best_loss,
        trace: res.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_keep_start() {
        let s = TunerSection {
            iterations: 0,
            ..TunerSection::default()
        };
        let r = spsa_minimize(&[1.0, 2.0], &s, |t| t[0] * t[0] + t[1]).unwrap();
        assert_eq!(r.best_theta, vec![1.0, 2.0]);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn quadratic_converges() {
        let s = TunerSection {
            iterations: 200,
            step: 0.5,
            perturbation: 0.1,
            max_step: 1.0,
            ..TunerSection::default()
        };
        let r = spsa_minimize(&[0.0], &s, |t| (t[0] - 3.0).powi(2)).unwrap();
        assert!((r.best_theta[0] - 3.0).abs() < 0.3, "{:?}", r.best_theta);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nan_losses_are_rejected() {
        let s = TunerSection {
            iterations: 20,
            ..TunerSection::default()
        };
        let r = spsa_minimize(&[0.0], &s, |t| if t[0] > 0.0 { f64::NAN } else { t[0] * t[0] }).unwrap();
        assert!(r.best_loss.is_finite());
    }

    #[test]
    fn codec_zero_is_identity() {
        let base = PipelineConfig::default();
        let codec = ParamCodec::new(&base, 20).unwrap();
        assert_eq!(codec.dim(), 30 + 8 + 4 + 5);
        let cfg = codec.decode(&codec.zero());
        assert_eq!(cfg.resolved_params(20), base.resolved_params(20));
        assert_eq!(cfg.resolved_metrics(), base.resolved_metrics());
        assert_eq!(cfg.resolved_merge(), base.resolved_merge());
        assert_eq!(cfg.resolved_residual(), base.resolved_residual());
        assert!(cfg.validate().is_ok());
    }
}
