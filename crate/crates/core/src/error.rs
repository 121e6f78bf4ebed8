use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is out of domain: requires {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{method} did not converge after {iterations} iterations")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
    },
    #[error("degenerate Hessian: |det| = {det:e} is not above the floor {floor:e}")]
    DegenerateHessian { det: f64, floor: f64 },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("indeterminate form: {0}")]
    IndeterminateForm(String),
    #[error("{failed} of {trials} trials failed, above the 1% limit; first failure: {first}")]
    TooManyFailures {
        failed: usize,
        trials: usize,
        first: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
