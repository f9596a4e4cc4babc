use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PhysicalGraph;

use super::table::SignalTable;

/// Knobs of the synthetic road-sensor generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub stations: usize,
    pub steps: usize,
    pub seed: u64,
    /// Steps per seasonal cycle; 288 is one day at 5-minute sampling.
    pub period: usize,
    /// Seconds between rows.
    pub interval: i64,
    pub base: f64,
    pub amplitude: f64,
    /// Standard deviation of the innovation driving the diffused noise.
    pub noise: f64,
    /// AR(1) coefficient of the noise process.
    pub persistence: f64,
    /// Share of each noise update taken from the neighbor mean.
    pub diffusion: f64,
    /// Standard deviation of independent per-reading noise.
    pub measurement_noise: f64,
    /// Phase offset across the unit square, in radians.
    pub phase_spread: f64,
    /// Nearest neighbors wired per station before the spanning-tree pass.
    pub k: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            stations: 20,
            steps: 2000,
            seed: 7,
            period: 288,
            interval: 300,
            base: 50.0,
            amplitude: 10.0,
            noise: 3.0,
            persistence: 0.5,
            diffusion: 0.5,
            measurement_noise: 1.0,
            phase_spread: 0.5 * PI,
            k: 3,
        }
    }
}

/// Random geometric road network plus station-phase sinusoids with graph-diffused AR noise.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<(SignalTable, PhysicalGraph)> {
    let n = cfg.stations;
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 stations, got {n}")));
    }
    if cfg.steps == 0 || cfg.period == 0 || cfg.interval <= 0 {
        return Err(Error::invalid("steps, period and interval must be positive"));
    }
    if !(0.0..1.0).contains(&cfg.persistence.abs()) || !(0.0..=1.0).contains(&cfg.diffusion) {
        return Err(Error::invalid(
            "persistence must lie in (-1, 1) and diffusion in [0, 1]",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let dist = |a: usize, b: usize| ((pos[a].0 - pos[b].0).powi(2) + (pos[a].1 - pos[b].1).powi(2)).sqrt();

    let mut pairs = std::collections::BTreeSet::new();
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)).then(a.cmp(&b)));
        for &j in others.iter().take(cfg.k) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    // Prim's tree guarantees connectivity.
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (dist(0, j), 0);
    }
    for _ in 1..n {
        let (v, &(_, p)) = best
            .iter()
            .enumerate()
            .filter(|(j, _)| !in_tree[*j])
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("a station remains");
        in_tree[v] = true;
        pairs.insert((v.min(p), v.max(p)));
        for j in 0..n {
            if !in_tree[j] && dist(v, j) < best[j].0 {
                best[j] = (dist(v, j), v);
            }
        }
    }
    let edges: Vec<_> = pairs.into_iter().map(|(a, b)| (a, b, dist(a, b))).collect();
    let graph = PhysicalGraph::new(n, edges)?;
    let adj = graph.adjacency();

    let phase: Vec<f64> = pos.iter().map(|p| cfg.phase_spread * p.0).collect();
    let level: Vec<f64> = pos.iter().map(|p| cfg.base + 10.0 * p.1).collect();
    let mut noise = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut values = Vec::with_capacity(cfg.steps);
    for t in 0..cfg.steps {
        for s in 0..n {
            let nb = adj[s].iter().map(|&(j, _)| noise[j]).sum::<f64>() / adj[s].len().max(1) as f64;
            let mixed = (1.0 - cfg.diffusion) * noise[s] + cfg.diffusion * nb;
            let eps: f64 = rng.sample(StandardNormal);
            next[s] = cfg.persistence * mixed + cfg.noise * eps;
        }
        std::mem::swap(&mut noise, &mut next);
        let arg = 2.0 * PI * t as f64 / cfg.period as f64;
        values.push(
            (0..n)
                .map(|s| {
                    let m: f64 = rng.sample(StandardNormal);
                    level[s] + cfg.amplitude * (arg + phase[s]).sin() + noise[s] + cfg.measurement_noise * m
                })
                .collect(),
        );
    }
    let timestamps = (0..cfg.steps as i64).map(|t| t * cfg.interval).collect();
    Ok((SignalTable::new(timestamps, values)?, graph))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_connected() {
        let cfg = SynthConfig {
            steps: 50,
            ..SynthConfig::default()
        };
        let (a, ga) = generate_synthetic(&cfg).unwrap();
        let (b, gb) = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ga, gb);
        assert!(ga.is_connected());
        assert_eq!(a.stations(), 20);
        assert_eq!(a.timestamps[3], 900);
    }

    #[test]
    fn noiseless_is_periodic() {
        let cfg = SynthConfig {
            stations: 4,
            steps: 40,
            period: 12,
            noise: 0.0,
            measurement_noise: 0.0,
            ..SynthConfig::default()
        };
        let (t, _) = generate_synthetic(&cfg).unwrap();
        for i in 12..40 {
            for s in 0..4 {
                assert!((t.values[i][s] - t.values[i - 12][s]).abs() < 1e-9);
            }
        }
        assert!(generate_synthetic(&SynthConfig { stations: 1, ..cfg }).is_err());
    }
}
