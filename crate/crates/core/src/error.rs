//! Error type shared by every module of the suite.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported gradient: {0}")]
    UnsupportedGradient(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("episode already finished; call reset before stepping again")]
    EpisodeFinished,

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("w+ is infinite for a zero transverse field; use the classical path")]
    InfiniteCoupling,

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("layout parse error on line {line}: {message}")]
    Layout { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by a bad experiment description, reported
    /// before any run starts.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Layout { .. })
    }
}
