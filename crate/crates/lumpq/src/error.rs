use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum} (must be 1 within 1e-12)")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("matrix must be at least 2x2")]
    TooSmall,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("aggregate {0} has zero stationary mass")]
    ZeroAggregateMass(usize),
    #[error("aggregate {0} is empty")]
    EmptyAggregate(usize),
    #[error("label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("partition has {labels} labels for {n} states")]
    PartitionLength { labels: usize, n: usize },
    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),
    #[error("singular value decomposition failed: {0}")]
    DecompositionFailure(String),
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("gave up after {0} whole-matrix regenerations (zero rows persist)")]
    GenerationExhausted(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("fewer distinct points than clusters")]
    DegenerateInput,
    #[error("state {0} has stationary mass below 1e-15")]
    ZeroStationaryMass(usize),
    #[error("aggregate {0} is absorbing (exit probability below 1e-12)")]
    AbsorbingAggregate(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short machine-readable token, used in benchmark CSV flag columns.
    pub fn token(&self) -> &'static str {
        match self {
            Error::NegativeEntry { .. } => "negative_entry",
            Error::RowSumViolation { .. } => "row_sum",
            Error::TooSmall => "too_small",
            Error::NotSquare { .. } => "not_square",
            Error::NoConvergence(_) => "no_convergence",
            Error::ZeroAggregateMass(_) => "zero_aggregate_mass",
            Error::EmptyAggregate(_) => "empty_aggregate",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::PartitionLength { .. } => "partition_length",
            Error::EigenFailure(_) => "eigen_failure",
            Error::DecompositionFailure(_) => "decomposition_failure",
            Error::ParseError { .. } => "parse_error",
            Error::Io(_) => "io",
            Error::GenerationExhausted(_) => "generation_exhausted",
            Error::DimensionMismatch(..) => "dimension_mismatch",
            Error::DegenerateInput => "degenerate_input",
            Error::ZeroStationaryMass(_) => "zero_stationary_mass",
            Error::AbsorbingAggregate(_) => "absorbing_aggregate",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
