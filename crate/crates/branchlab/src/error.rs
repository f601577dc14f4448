use thiserror::Error;

/// Errors surfaced by configuration loading, model validation and the
/// simulation/verification operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("degenerate environment state {state}: mean offspring is zero")]
    DegenerateEnvironment { state: usize },

    #[error("environment state {state} has mean offspring {mean} <= 1; the backward law requires m >= a > 1 in every state")]
    SubcriticalState { state: usize, mean: f64 },

    #[error("exact computation unsupported for continuous-trait models: {0}")]
    UnsupportedExact(String),

    #[error("enumeration budget exceeded ({0}); use the Monte Carlo variant instead")]
    EnumerationBudget(String),

    #[error("empty generation: no individuals alive at generation {0}")]
    EmptyGeneration(usize),

    #[error("explicit-tree node budget exceeded: expected {expected:.3e} nodes, budget {budget}")]
    NodeBudget { expected: f64, budget: u64 },

    #[error("degenerate normalizer: total increment variance is zero over the horizon")]
    DegenerateNormalizer,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    ConfigFile { path: String, message: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
