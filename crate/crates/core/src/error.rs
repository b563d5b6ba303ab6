use thiserror::Error;

/// Errors raised across the reservoir pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("proper time {tau} outside profile range [0, {total}]")]
    OutOfRange { tau: f64, total: f64 },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("numerical validity failure: {0}")]
    Numerical(String),
    #[error("Fock leakage {leakage:.3e} exceeds {limit:.1e}")]
    Leakage { leakage: f64, limit: f64 },
    #[error("data error: {0}")]
    Data(String),
    #[error("wrong detector kind: {0}")]
    Kind(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable code used by the command-line runner.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::OutOfRange { .. } => "out_of_range",
            Error::Encoding(_) => "encoding",
            Error::Dimension { .. } => "dimension",
            Error::Numerical(_) => "numerical",
            Error::Leakage { .. } => "leakage",
            Error::Data(_) => "data",
            Error::Kind(_) => "kind",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// validity failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Encoding(_) | Error::Parse { .. } => 2,
            Error::Numerical(_) | Error::Leakage { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
