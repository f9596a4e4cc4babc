use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::graph::{MixedGraph, SpatialSkeleton, SpatialWeights, TemporalSkeleton};

use super::metric::{Features, HeadMetrics, MetricBank, MetricMatrix};

fn log_sum_exp(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + vals.map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn distance(features: &Features, a: usize, b: usize, m: &MetricMatrix, diff: &mut [f64]) -> f64 {
    for ((d, x), y) in diff.iter_mut().zip(features.node(a)).zip(features.node(b)) {
        *d = x - y;
    }
    m.quad(diff)
}

/// Symmetric per-instant spatial weights
/// `exp(-d_ij) / sqrt(sum_{l in N_i} exp(-d_il) * sum_{k in N_j} exp(-d_kj))`.
pub fn undirected_weights(
    features: &Features,
    skel: &SpatialSkeleton,
    metrics: &[MetricMatrix],
) -> Result<SpatialWeights> {
    let n = skel.station_count();
    let instants = metrics.len();
    check_len("featured nodes", n * instants, features.len())?;
    let mut diff = vec![0.0; features.dim()];
    let mut per_instant = Vec::with_capacity(instants);
    for (t, m) in metrics.iter().enumerate() {
        check_len("metric dimension", features.dim(), m.dim())?;
        let base = t * n;
        let d: Vec<f64> = skel
            .edges()
            .iter()
            .map(|&(a, b)| distance(features, base + a, base + b, m, &mut diff))
            .collect();
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature distance at instant {t}")));
        }
        let log_s: Vec<f64> = (0..n)
            .map(|i| {
                log_sum_exp(
                    skel.neighbors(i)
                        .iter()
                        .map(|&j| -d[skel.edge_index(i, j).expect("skeleton edge")]),
                )
            })
            .collect();
        per_instant.push(
            skel.edges()
                .iter()
                .zip(&d)
                .map(|(&(a, b), &dab)| (-dab - 0.5 * log_s[a] - 0.5 * log_s[b]).exp())
                .collect(),
        );
    }
    Ok(SpatialWeights { per_instant })
}

/// Directed weights in skeleton edge order: a softmax of `-d` over each child's
/// predecessors, with the metric picked by lag.
pub fn directed_weights(features: &Features, skel: &TemporalSkeleton, metrics: &[MetricMatrix]) -> Result<Vec<f64>> {
    check_len("featured nodes", skel.layout().len(), features.len())?;
    check_len("directed metrics", skel.window(), metrics.len())?;
    for m in metrics {
        check_len("metric dimension", features.dim(), m.dim())?;
    }
    let edges = skel.edges();
    let mut diff = vec![0.0; features.dim()];
    let mut out = vec![0.0; edges.len()];
    for node in 0..skel.layout().len() {
        let range = skel.incoming(node);
        if range.is_empty() {
            continue;
        }
        let logits: Vec<f64> = edges[range.clone()]
            .iter()
            .map(|e| -distance(features, e.to, e.from, &metrics[e.lag - 1], &mut diff))
            .collect();
        let lse = log_sum_exp(logits.iter().copied());
        if !lse.is_finite() {
            return Err(Error::invalid(format!("degenerate attention at node {node}")));
        }
        for (o, l) in out[range].iter_mut().zip(&logits) {
            *o = (l - lse).exp();
        }
    }
    Ok(out)
}

/// Assembles a mixed graph from learned weights; the first `observed_instants` instants are observed.
pub fn build_mixed_graph(
    spatial: &SpatialSkeleton,
    temporal: &TemporalSkeleton,
    weights_u: &SpatialWeights,
    weights_d: &[f64],
    observed_instants: usize,
) -> Result<MixedGraph> {
    MixedGraph::assemble(spatial, temporal, weights_u, weights_d, observed_instants)
}

/// Graph of one head.
pub fn head_graph(
    features: &Features,
    spatial: &SpatialSkeleton,
    temporal: &TemporalSkeleton,
    head: &HeadMetrics,
    observed_instants: usize,
) -> Result<MixedGraph> {
    let wu = undirected_weights(features, spatial, &head.undirected)?;
    let wd = directed_weights(features, temporal, &head.directed)?;
    build_mixed_graph(spatial, temporal, &wu, &wd, observed_instants)
}

/// One graph per head of `bank`.
pub fn multi_head_graphs(
    features: &Features,
    spatial: &SpatialSkeleton,
    temporal: &TemporalSkeleton,
    bank: &MetricBank,
    observed_instants: usize,
) -> Result<Vec<MixedGraph>> {
    if bank.heads.is_empty() {
        return Err(Error::invalid("metric bank needs at least one head"));
    }
    bank.heads
        .par_iter()
        .map(|h| head_graph(features, spatial, temporal, h, observed_instants))
        .collect()
}
