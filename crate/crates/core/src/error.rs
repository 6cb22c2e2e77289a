use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// WAV container or codec problems.
    #[error("wav: {0}")]
    Wav(String),

    /// Corpus manifest problems (bad label, duplicate path, malformed line).
    #[error("manifest: {0}")]
    Manifest(String),

    /// Invalid pipeline or classifier configuration.
    #[error("config: {0}")]
    Config(String),

    /// DSP precondition violations (clip too short, filterbank collapse, ...).
    #[error("dsp: {0}")]
    Dsp(String),

    /// Dataset or feature-table invariant violations, dimension mismatches.
    #[error("data: {0}")]
    Data(String),

    /// Training failures (singular covariance, SMO non-convergence, ...).
    #[error("train: {0}")]
    Train(String),

    /// Model serialization / version problems.
    #[error("model: {0}")]
    Model(String),

    /// Evaluation harness failures, tagged with the failing repetition.
    #[error("eval: {0}")]
    Eval(String),
}

pub type Result<T> = std::result::Result<T, Error>;
