use crate::signal::ProtocolLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range (valid {lo}..={hi})")]
    OutOfRange { index: usize, lo: usize, hi: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("SNR undefined: recording carries no signal power")]
    NoSignalPower,

    #[error("PAPR undefined: span {start}..{end} has zero power")]
    ZeroPower { start: usize, end: usize },

    #[error("overlapping bursts: previous ends at {prev_end}, current starts at {cur_start}")]
    OverlappingBursts { prev_end: usize, cur_start: usize },

    #[error("feature `{0}` has zero variance")]
    ZeroVariance(&'static str),

    #[error("training data has a single class")]
    SingleClass,

    #[error("class {0} missing from training data")]
    MissingClass(ProtocolLabel),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error("standardization mismatch: model stats {model}, dataset stats {dataset}")]
    StatsMismatch { model: String, dataset: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad arguments or configuration rather than
    /// by the environment (I/O, parse failures of existing files).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidInput(_)
                | Error::UnknownFormat(_)
                | Error::DimensionMismatch(..)
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
