use std::path::PathBuf;

use thiserror::Error;

/// Sub-step of an ADMM layer, used to localize numeric failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubStep {
    X,
    Zu,
    Zd,
    Phi,
    Multipliers,
}

impl std::fmt::Display for SubStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SubStep::X => "x-update",
            SubStep::Zu => "z_u-update",
            SubStep::Zd => "z_d-update",
            SubStep::Phi => "phi-update",
            SubStep::Multipliers => "multiplier-update",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("node {node} has incoming edges but zero total in-degree")]
    DegenerateDegree { node: usize },

    #[error("non-finite value in conjugate gradient at iteration {iteration}")]
    CgDiverged { iteration: usize },

    #[error("numeric failure in layer {layer}, {step}: {source}")]
    Layer {
        layer: usize,
        step: SubStep,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite state after layer {layer}, {step}")]
    NonFinite { layer: usize, step: SubStep },

    #[error("block {block}, head {head}: {source}")]
    Block {
        block: usize,
        head: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("power iteration did not converge (residual {residual:.3e})")]
    NotConverged { residual: f64 },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
