use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("p must be prime, got {0}")]
    NotPrime(u64),
    #[error("N + K must be at least 1 (got N = {n}, K = {k})")]
    EmptyGrid { n: i32, k: i32 },
    #[error("grid has {cells} cells, above the configured cap of {cap}")]
    GridTooLarge { cells: u128, cap: usize },
    #[error("valuation of 0 is infinite")]
    ZeroValuation,
    #[error("index {index} out of range for a grid of {cells} cells")]
    IndexOutOfRange { index: usize, cells: usize },
    #[error("radius {0} is not attained on this grid")]
    UnattainableRadius(f64),
    #[error("fractional order must be positive, got {0}")]
    InvalidAlpha(f64),
    #[error("smoothness s must lie in (0, 1), got {0}")]
    InvalidSmoothness(f64),
    #[error("power-law exponent m must be positive, got {0}")]
    InvalidExponent(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("first-layer index j = {j} outside [1, {max}]")]
    LayerIndex { j: u64, max: u64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error(
        "character {b} is not an eigenfunction of the kernel operator (ratio spread {spread:e})"
    )]
    NotEigenfunction { b: usize, spread: f64 },
    #[error("time profile must vanish at both ends (theta(0) = {start:e}, theta(T) = {end:e})")]
    ProfileEndpoints { start: f64, end: f64 },
    #[error("function is not real-valued (max imaginary part {0:e})")]
    NotReal(f64),
    #[error("proximal step did not converge at mu = {mu:e}: residual {residual:e} after {iterations} Newton iterations")]
    NonConvergence {
        mu: f64,
        residual: f64,
        iterations: usize,
        history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
