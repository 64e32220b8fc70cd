use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("not Hermitian (max |m_ij - conj(m_ji)| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("trace is not 1 (got {trace}, deviation {deviation:e})")]
    TraceNotOne { trace: f64, deviation: f64 },

    #[error("not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("completeness violated at entry ({row}, {col}) with residual {residual:e}")]
    Completeness { row: usize, col: usize, residual: f64 },

    #[error("phase derivative {value} of element {element} at index {index} outside [0, {bound}]")]
    DerivOutOfRange {
        element: usize,
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("malformed channel: {0}")]
    MalformedChannel(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("Fisher information is zero; the parameter cannot be estimated")]
    ZeroFisherInformation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI and FFI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension",
            Error::NotSquare { .. } => "not_square",
            Error::NotHermitian { .. } => "non_hermitian",
            Error::TraceNotOne { .. } => "trace",
            Error::NotPsd { .. } => "non_psd",
            Error::Completeness { .. } => "completeness",
            Error::DerivOutOfRange { .. } => "deriv_range",
            Error::MalformedChannel(_) => "malformed_channel",
            Error::IndexOutOfRange(_) => "index_range",
            Error::InvalidDistribution(_) => "distribution",
            Error::InvalidPovm(_) => "povm",
            Error::InvalidEnsemble(_) => "ensemble",
            Error::ZeroFisherInformation => "zero_fisher_information",
            Error::InvalidArgument(_) => "argument",
            Error::Parse(_) => "parse",
        }
    }

    /// True for errors that come from the mathematics of the request rather
    /// than from malformed input.
    pub fn is_domain_error(&self) -> bool {
        matches!(self, Error::ZeroFisherInformation)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
