use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing column `{column}` (expected header `{expected}`)")]
    MissingColumn { column: String, expected: String },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },

    #[error("no aircraft rows")]
    NoAircraftRows,

    #[error("line {line}: duplicate aircraft code `{code}`")]
    DuplicateCode { line: u64, code: String },

    #[error("line {line} ({code}): {field} must be strictly positive, got {value}")]
    NonPositive {
        line: u64,
        code: String,
        field: &'static str,
        value: f64,
    },

    #[error("line {line} ({code}): max landing weight {mlw} exceeds max takeoff weight {mtow}")]
    MlwExceedsMtow {
        line: u64,
        code: String,
        mlw: f64,
        mtow: f64,
    },

    #[error("line {line} ({code}): empty + passenger mass {payload} is not below max takeoff weight {mtow}")]
    PayloadExceedsMtow {
        line: u64,
        code: String,
        payload: f64,
        mtow: f64,
    },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("unknown aircraft code `{0}`")]
    UnknownAircraft(String),

    #[error("unknown country `{0}`")]
    UnknownCountry(String),

    #[error("invalid parameter {name} = {value}: {rule}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        rule: &'static str,
    },

    #[error("{0} must not be negative, got {1}")]
    Negative(&'static str, f64),

    #[error("{code}: no room for a battery under {limit} (limit - empty - passengers = {allowance} kg)")]
    NoBatteryAllowance {
        code: String,
        limit: &'static str,
        allowance: f64,
    },

    #[error("{code}: {message}")]
    Fit { code: String, message: String },

    #[error("no aircraft curve for `{0}`")]
    MissingCurve(String),

    #[error("zero electric energy; tipping point undefined")]
    ZeroEnergy,

    #[error("{country}: grid intensity equals tipping point; electric emissions cannot be recovered")]
    DegenerateRecovery { country: String },

    #[error("improvement fraction must lie in [0, 1], got {0}")]
    FractionOutOfRange(f64),

    #[error("coordinate out of range: {0}")]
    Coordinate(String),

    #[error("config: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that reflect a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
