use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("energy shell is degenerate: |bracket| = {bracket:e} at (x, xi) = ({x}, {xi})")]
    ShellDegenerate { x: f64, xi: f64, bracket: f64 },
    #[error("energy {0} lies outside the classical spectrum (or inside the boundary margin)")]
    NoSolution(String),
    #[error("phase-space volume estimates disagree: quadrature {quadrature}, monte carlo {monte_carlo} +- {stderr}")]
    InconsistentVolume {
        quadrature: f64,
        monte_carlo: f64,
        stderr: f64,
    },
    #[error("basis {basis} cannot discretize model {model}")]
    BasisMismatch { basis: String, model: String },
    #[error("basis cutoff too small: covers energies up to {covered}, window needs {needed}")]
    CutoffTooSmall { covered: f64, needed: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigenvalue iteration did not converge after {sweeps} sweeps ({remaining} eigenvalues left)")]
    NoConvergence { sweeps: usize, remaining: usize },
    #[error("companion matrix eigenvalues failed: {0}")]
    CompanionFailure(String),
    #[error("argument-principle counts disagree: boundary {boundary}, cells {cells}")]
    WindingMismatch { boundary: i64, cells: i64 },
    #[error("problem size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("kernel matrix nearly singular (condition number {0:e}); points too close")]
    NearSingularA(f64),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("bin [{lo}, {hi}) expects {expected} pairs under the Poisson reference")]
    BinDegenerate { lo: f64, hi: f64, expected: f64 },
    #[error("bin edges differ between the two estimates")]
    BinMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
