use thiserror::Error;

/// Failure class, used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input data is malformed or does not satisfy a precondition.
    Data,
    /// A numerical procedure failed (singular systems, rank deficiency, ...).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed CSV at line {line}, column {column}: {message}")]
    MalformedCsv {
        line: usize,
        column: String,
        message: String,
    },
    #[error("unknown sector {value:?} at line {line}")]
    UnknownSector { line: usize, value: String },
    #[error("duplicate key {key} at lines {first_line} and {second_line}")]
    DuplicateKey {
        key: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("duplicate panel key {0}")]
    DuplicatePanelKey(String),
    #[error("conflicting key {0} across input panels")]
    ConflictingKeys(String),
    #[error("incompatible units for {variable}: {first:?} vs {second:?}")]
    IncompatibleUnits {
        variable: String,
        first: String,
        second: String,
    },
    #[error("series {0} has no observed value")]
    AllMissingSeries(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient rows: {available} complete rows, need at least {required}")]
    InsufficientRows { available: usize, required: usize },
    #[error("design matrix is rank deficient (dependent column {column:?})")]
    RankDeficient { column: String },
    #[error("entity {0} has a single observation")]
    SingletonEntity(String),
    #[error("cluster-robust covariance needs at least two clusters")]
    SingleCluster,
    #[error("too few periods: {0}")]
    TooFewPeriods(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("k = {k} exceeds the number of rows ({rows})")]
    KTooLarge { k: usize, rows: usize },
    #[error("too few samples: {available} available, need at least {required}")]
    TooFewSamples { available: usize, required: usize },
    #[error("too few nonempty variogram bins: {available} available, need at least {required}")]
    TooFewBins { available: usize, required: usize },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("sample {index} lacks covariate {name:?}")]
    MissingCovariate { index: usize, name: String },
    #[error("trend design is rank deficient (dependent covariate {0:?})")]
    RankDeficientTrend(String),
    #[error("samples are collinear; thin-plate spline needs a non-degenerate triangle")]
    CollinearSamples,
    #[error("bounding box is empty")]
    EmptyBbox,
    #[error("raster has no data cells")]
    AllNodata,
    #[error("covariance factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("every cross-validation fold failed: {0}")]
    AllFoldsFailed(String),
    #[error("malformed raster: {0}")]
    MalformedRaster(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::RankDeficient { .. }
            | Error::SingularSystem(_)
            | Error::RankDeficientTrend(_)
            | Error::FactorizationFailed(_)
            | Error::AllFoldsFailed(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
