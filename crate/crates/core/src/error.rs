use thiserror::Error;

/// Errors raised by the preconditioning routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block {block} of the group element is singular")]
    SingularBlock { block: usize },

    #[error("zero diagonal entry at index {0}")]
    ZeroDiagonalEntry(usize),

    #[error("zero row or column at index {0}")]
    ZeroRowOrColumn(usize),

    #[error("matrix is rank deficient (rank {rank}, expected {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e}){}", probe.map(|p| format!(" at probe {p}")).unwrap_or_default())]
    NotConverged {
        iterations: usize,
        residual: f64,
        probe: Option<usize>,
    },

    #[error("probe block is rank deficient")]
    SingularProbeBlock,

    #[error("block Lanczos lost block rank at iteration {0}")]
    BreakdownAtIteration(usize),

    #[error("Jacobian vanishes at the evaluation point")]
    ZeroJacobian,

    #[error("change of variables expands to {terms} terms (cap {cap})")]
    ExpansionOverflow { terms: usize, cap: usize },

    #[error("point coordinate {0} is zero")]
    ZeroCoordinate(usize),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unsupported Matrix Market qualifier: {0}")]
    UnsupportedQualifier(String),

    #[error("polynomial {poly}: term {term} exceeds the declared degree")]
    DegreeViolation { poly: usize, term: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::ExpansionOverflow { .. }
                | Error::BreakdownAtIteration(_)
                | Error::SingularProbeBlock
                | Error::SingularBlock { .. }
        )
    }
}
