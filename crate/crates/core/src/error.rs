use std::path::PathBuf;

/// Errors produced anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is unsupported or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The config file could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Every point of a constellation collapsed onto the origin or onto each other.
    #[error("degenerate constellation: {0}")]
    DegenerateConstellation(String),

    /// Training finished but produced an unusable transceiver.
    #[error("training failure: {0}")]
    TrainingFailure(String),

    /// The training loss became non-finite.
    #[error("training diverged at iteration {iteration} (loss = {loss})")]
    Divergence { iteration: usize, loss: f64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
