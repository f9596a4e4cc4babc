//! Spatio-temporal forecasting on mixed graphs: an undirected spatial graph per
//! instant joined by a directed temporal DAG, solved by unrolled ADMM.

pub mod admm;
pub mod error;
pub mod graph;
pub mod io;
pub mod learn;
pub mod pipeline;
pub mod priors;
pub mod verify;

pub use error::{Error, Result};
