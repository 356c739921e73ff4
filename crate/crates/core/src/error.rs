use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: worst panel [{lo}, {hi}] on piece {piece}, error estimate {estimate:e}")]
    NonConvergence {
        piece: usize,
        lo: f64,
        hi: f64,
        estimate: f64,
    },
    #[error("(psi0, (1 - p^2) psi0) = {value} must be negative")]
    NormSign { value: f64 },
    #[error("path leaves the analyticity region at {point}")]
    PathValidation { point: Complex64 },
    #[error("Newton iteration did not converge after {iters} steps (last z = {last}, |F| = {residual:e})")]
    NoConvergence {
        iters: usize,
        last: Complex64,
        residual: f64,
    },
    #[error("F vanishes on the rectangle boundary after {attempts} perturbations")]
    BoundaryZero { attempts: usize },
    #[error("winding number {value} is not within 0.05 of an integer")]
    NonIntegerWinding { value: f64 },
    #[error("branch lost at f = {f} (last certified root {last})")]
    BranchLost { f: f64, last: Complex64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
