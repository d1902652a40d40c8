use thiserror::Error;

pub type Result<T> = std::result::Result<T, MaddError>;

#[derive(Debug, Error)]
pub enum MaddError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid probability {0}: must be finite and within [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid bin count {0}: need at least 2 bins")]
    InvalidBinCount(usize),
    #[error("bin count mismatch: {0} vs {1}")]
    BinCountMismatch(usize, usize),
    #[error("invalid bandwidth {0}: must be positive and finite")]
    InvalidBandwidth(f64),
    #[error("invalid density vector: {0}")]
    InvalidDensity(String),
    #[error("invalid quantile {0}: must lie in [0, 1]")]
    InvalidQuantile(f64),
    #[error("group {0} has no members")]
    EmptyGroup(u8),
    #[error("invalid lambda {0}: must lie in [0, 1]")]
    InvalidLambda(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("missing labels: {0} record(s) have no label")]
    MissingLabels(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("encoding error: {0}")]
    EncodingError(String),
    #[error("invalid split ratios {0:?}: must be non-negative and sum to 1")]
    InvalidRatios([f64; 3]),
    #[error("training diverged at iteration {0}")]
    TrainingDiverged(usize),
    #[error("model is not trained")]
    NotTrained,
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl MaddError {
    /// Stable identifier used in CLI diagnostics and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            MaddError::EmptyPopulation => "EmptyPopulation",
            MaddError::InvalidProbability(_) => "InvalidProbability",
            MaddError::InvalidBinCount(_) => "InvalidBinCount",
            MaddError::BinCountMismatch(..) => "BinCountMismatch",
            MaddError::InvalidBandwidth(_) => "InvalidBandwidth",
            MaddError::InvalidDensity(_) => "InvalidDensity",
            MaddError::InvalidQuantile(_) => "InvalidQuantile",
            MaddError::EmptyGroup(_) => "EmptyGroup",
            MaddError::InvalidLambda(_) => "InvalidLambda",
            MaddError::LengthMismatch(..) => "LengthMismatch",
            MaddError::MissingLabels(_) => "MissingLabels",
            MaddError::InvalidConfig(_) => "InvalidConfig",
            MaddError::EncodingError(_) => "EncodingError",
            MaddError::InvalidRatios(_) => "InvalidRatios",
            MaddError::TrainingDiverged(_) => "TrainingDiverged",
            MaddError::NotTrained => "NotTrained",
            MaddError::Parse(_) => "Parse",
            MaddError::Io(_) => "Io",
            MaddError::Csv(_) => "Csv",
            MaddError::Json(_) => "Json",
        }
    }

    /// Distinct nonzero code per error kind. Shared by the process exit status
    /// and the C ABI status values.
    pub fn code(&self) -> i32 {
        match self {
            MaddError::EmptyPopulation => 10,
            MaddError::InvalidProbability(_) => 11,
            MaddError::InvalidBinCount(_) => 12,
            MaddError::BinCountMismatch(..) => 13,
            MaddError::InvalidBandwidth(_) => 14,
            MaddError::InvalidDensity(_) => 15,
            MaddError::InvalidQuantile(_) => 16,
            MaddError::EmptyGroup(_) => 17,
            MaddError::InvalidLambda(_) => 18,
            MaddError::LengthMismatch(..) => 19,
            MaddError::MissingLabels(_) => 20,
            MaddError::InvalidConfig(_) => 21,
            MaddError::EncodingError(_) => 22,
            MaddError::InvalidRatios(_) => 23,
            MaddError::TrainingDiverged(_) => 24,
            MaddError::NotTrained => 25,
            MaddError::Parse(_) => 26,
            MaddError::Io(_) => 27,
            MaddError::Csv(_) => 28,
            MaddError::Json(_) => 29,
        }
    }
}
