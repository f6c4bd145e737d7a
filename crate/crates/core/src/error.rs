use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sub-sampling factor {factor} does not divide extent {extent}")]
    Divisibility { factor: usize, extent: usize },

    #[error("filter bank is empty")]
    EmptyBank,

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("unknown atom label {label} (bank has {count} propagation atoms)")]
    UnknownLabel { label: usize, count: usize },

    #[error(
        "module-sequence is not weakly admissible: layer {layer} has max(B, B*L^2) = {value:.6e} > 1"
    )]
    Inadmissible { layer: usize, value: f64 },

    #[error("ratio undefined: the two signals are identical")]
    IdenticalSignals,

    #[error("feature collections differ in structure: {0}")]
    StructureMismatch(String),

    #[error("domain does not fit inside the central half of the grid: {0}")]
    DomainOutsideSafeRegion(String),

    #[error("invalid cartoon specification: {0}")]
    InvalidCartoon(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed signal file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
