//! Data-dependent edge weights from node features and learned Mahalanobis metrics.

mod embed;
mod metric;
mod weights;

pub use embed::{embed, temporal_embedding, Embeddings, SpatialEigenmap, DEFAULT_SPATIAL_DIM, TEMPORAL_DIM};
pub use metric::{
    mahalanobis, swish, FeatureMap, Features, HeadMetrics, MetricBank, MetricMatrix, DEFAULT_FEATURE_DIM,
    DEFAULT_UNDIRECTED_FILL, SWISH_BETA,
};
pub use weights::{build_mixed_graph, directed_weights, head_graph, multi_head_graphs, undirected_weights};
