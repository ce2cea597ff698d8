use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular diagonal block at row {row}")]
    SingularDiagonal { row: usize },
    #[error("singular pivot block at row {row}")]
    SingularPivot { row: usize },
    #[error("missing diagonal entry at row {row}")]
    MissingDiagonal { row: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-finite residual at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("coarsest-level factorization failed: {0}")]
    CoarseSolve(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(SolverError::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
