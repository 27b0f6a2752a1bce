use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid cutpoints: must be strictly increasing")]
    InvalidCutpoints,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("initialization failed: no finite log-posterior after {attempts} draws")]
    InitializationFailed { attempts: usize },

    #[error("chain {chain} diverged to a non-finite state")]
    ChainDiverged { chain: usize },

    #[error("sampler failed on leave-one-out fold {fold}: {source}")]
    FoldFailure {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("calibration fit did not converge after {iterations} iterations (last gradient norm {grad_norm:.3e})")]
    CalibrationNonConvergence { iterations: usize, grad_norm: f64 },

    #[error("csv parse error at line {line}: {message}")]
    CsvFormat { line: u64, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
