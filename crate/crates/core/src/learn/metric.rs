use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Layout;
use crate::graph::SpatialSkeleton;

use super::embed::Embeddings;

/// Default diagonal of the undirected metric factors.
pub const DEFAULT_UNDIRECTED_FILL: f64 = 1.5;
/// Default feature dimension.
pub const DEFAULT_FEATURE_DIM: usize = 6;
/// Swish slope used when the activation is on.
pub const SWISH_BETA: f64 = 0.8;

/// `v · sigmoid(β v)`.
pub fn swish(v: f64, beta: f64) -> f64 {
    v / (1.0 + (-beta * v).exp())
}

/// Fixed projection from embeddings to `K`-dimensional features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    /// `K x E`, row-major.
    pub projection: Vec<Vec<f64>>,
    /// Averages each embedding with the mean of its spatial neighbors before projecting.
    #[serde(default)]
    pub aggregate_neighbors: bool,
    /// Applies swish with this β after projecting.
    #[serde(default)]
    pub swish_beta: Option<f64>,
}

impl FeatureMap {
    /// Selects the first `k` embedding coordinates.
    pub fn select_first(k: usize, embedding_dim: usize) -> Result<Self> {
        if k == 0 || k > embedding_dim {
            return Err(Error::invalid(format!(
                "feature dimension {k} must lie in 1..={embedding_dim}"
            )));
        }
        let projection = (0..k)
            .map(|r| (0..embedding_dim).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect();
        Ok(FeatureMap {
            projection,
            aggregate_neighbors: false,
            swish_beta: None,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.projection.len()
    }

    pub fn validate(&self, embedding_dim: usize) -> Result<()> {
        if self.projection.is_empty() {
            return Err(Error::invalid("feature projection has no rows"));
        }
        for row in &self.projection {
            check_len("feature projection row", embedding_dim, row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("feature projection has non-finite entries"));
            }
        }
        Ok(())
    }

    /// Features of every node.
    pub fn apply(&self, emb: &Embeddings, spatial: &SpatialSkeleton, layout: Layout) -> Result<Features> {
        self.validate(emb.dim())?;
        check_len("embedded nodes", layout.len(), emb.len())?;
        let k = self.feature_dim();
        let e = emb.dim();
        let mut data = Vec::with_capacity(k * emb.len());
        let mut buf = vec![0.0; e];
        for node in 0..emb.len() {
            buf.copy_from_slice(emb.node(node));
            if self.aggregate_neighbors {
                let idx = layout.index(node);
                let nb = spatial.neighbors(idx.station);
                if !nb.is_empty() {
                    let inv = 0.5 / nb.len() as f64;
                    buf.iter_mut().for_each(|v| *v *= 0.5);
                    for &j in nb {
                        let other = emb.node(layout.flat(j, idx.instant));
                        for (b, o) in buf.iter_mut().zip(other) {
                            *b += inv * o;
                        }
                    }
                }
            }
            for row in &self.projection {
                let v: f64 = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
                data.push(match self.swish_beta {
                    Some(beta) => swish(v, beta),
                    None => v,
                });
            }
        }
        Ok(Features { dim: k, data })
    }
}

/// Per-node feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    dim: usize,
    data: Vec<f64>,
}

impl Features {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::invalid("features need at least one row and column"));
        }
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            check_len("feature row", dim, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Features { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// PSD metric `M = M0^T M0` stored through its factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMatrix {
    /// `M0`, `K x K` row-major.
    pub factor: Vec<Vec<f64>>,
}

impl MetricMatrix {
    pub fn new(factor: Vec<Vec<f64>>) -> Result<Self> {
        let k = factor.len();
        if k == 0 {
            return Err(Error::invalid("metric factor is empty"));
        }
        for row in &factor {
            check_len("metric factor row", k, row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("metric factor has non-finite entries"));
            }
        }
        Ok(MetricMatrix { factor })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let factor = (0..diag.len())
            .map(|r| (0..diag.len()).map(|c| if r == c { diag[r] } else { 0.0 }).collect())
            .collect();
        MetricMatrix { factor }
    }

    pub fn scaled_identity(k: usize, s: f64) -> Self {
        Self::diagonal(&vec![s; k])
    }

    pub fn dim(&self) -> usize {
        self.factor.len()
    }

    /// Multiplies the factor by `s`, so `M` scales by `s²`.
    pub fn scaled(&self, s: f64) -> Self {
        MetricMatrix {
            factor: self.factor.iter().map(|r| r.iter().map(|v| v * s).collect()).collect(),
        }
    }

    /// `M0^T M0`.
    pub fn metric(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut m = vec![vec![0.0; k]; k];
        for row in &self.factor {
            for i in 0..k {
                for j in 0..k {
                    m[i][j] += row[i] * row[j];
                }
            }
        }
        m
    }

    /// `||M0 v||²` without the dimension check.
    pub(crate) fn quad(&self, diff: &[f64]) -> f64 {
        self.factor
            .iter()
            .map(|row| {
                let p: f64 = row.iter().zip(diff).map(|(a, b)| a * b).sum();
                p * p
            })
            .sum()
    }
}

/// `(f_i - f_j)^T M (f_i - f_j)`.
pub fn mahalanobis(fi: &[f64], fj: &[f64], m: &MetricMatrix) -> Result<f64> {
    check_len("feature pair", fi.len(), fj.len())?;
    check_len("metric dimension", m.dim(), fi.len())?;
    let diff: Vec<f64> = fi.iter().zip(fj).map(|(a, b)| a - b).collect();
    Ok(m.quad(&diff))
}

/// Metrics of one attention head: one per instant and one per lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadMetrics {
    pub undirected: Vec<MetricMatrix>,
    pub directed: Vec<MetricMatrix>,
}

impl HeadMetrics {
    /// `M0 = 1.5 I` for every instant and `P0_w = (1 + 0.2 w / W) I` for every lag.
    pub fn initial(k: usize, instants: usize, window: usize) -> Self {
        HeadMetrics {
            undirected: vec![MetricMatrix::scaled_identity(k, DEFAULT_UNDIRECTED_FILL); instants],
            directed: (1..=window)
                .map(|w| MetricMatrix::scaled_identity(k, 1.0 + 0.2 * w as f64 / window as f64))
                .collect(),
        }
    }

    /// Copy with every undirected factor scaled by `su` and every directed factor by `sd`.
    pub fn scaled(&self, su: f64, sd: f64) -> Self {
        HeadMetrics {
            undirected: self.undirected.iter().map(|m| m.scaled(su)).collect(),
            directed: self.directed.iter().map(|m| m.scaled(sd)).collect(),
        }
    }
}

/// Metric replicas for all heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBank {
    pub heads: Vec<HeadMetrics>,
}

impl MetricBank {
    pub fn initial(k: usize, instants: usize, window: usize, heads: usize) -> Self {
        MetricBank {
            heads: vec![HeadMetrics::initial(k, instants, window); heads],
        }
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    /// Checks counts against the graph and feature dimensions.
    pub fn validate(&self, k: usize, instants: usize, window: usize) -> Result<()> {
        if self.heads.is_empty() {
            return Err(Error::invalid("metric bank needs at least one head"));
        }
        for head in &self.heads {
            check_len("undirected metrics per head", instants, head.undirected.len())?;
            check_len("directed metrics per head", window, head.directed.len())?;
            for m in head.undirected.iter().chain(&head.directed) {
                MetricMatrix::new(m.factor.clone())?;
                check_len("metric dimension", k, m.dim())?;
            }
        }
        Ok(())
    }
}
