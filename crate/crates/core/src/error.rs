use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("combinatorial blowup: {candidates} candidate bases exceed the cap of {cap}")]
    CombinatorialBlowup { candidates: u128, cap: u128 },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-polynomial expression at line {line}, column {column}: {message}")]
    NonPolynomial {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("lower-level value is not finite at x = {x:?} ({status})")]
    PhiNotFinite { x: Vec<f64>, status: String },

    #[error("operation requires fixed lower-level coefficients, model form is {0}")]
    FormNotSupported(String),

    #[error("center is not lower-level optimal: distance {0:e}")]
    CenterNotOptimal(f64),

    #[error("every sample was skipped ({0})")]
    AllSamplesSkipped(String),

    #[error("{rows} rows exceed the subset cap of {cap}")]
    SubsetCapExceeded { rows: usize, cap: usize },

    #[error("path is infeasible at every scheduled t")]
    PathInfeasibleEverywhere,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("report: {0}")]
    Report(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
