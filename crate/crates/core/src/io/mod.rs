//! CSV ingestion, sample windowing and the synthetic data generator.

mod dataset;
mod synth;
mod table;

pub use dataset::{
    build_dataset, cut_samples, load_dataset, split_counts, window_count, Dataset, DatasetSpec, Sample, SplitRatios,
};
pub use synth::{generate_synthetic, SynthConfig};
pub use table::{read_edges, write_edges, SignalTable};
