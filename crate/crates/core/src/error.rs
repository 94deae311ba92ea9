use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate lattice: |det basis| = {0:e}")]
    DegenerateLattice(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("component mismatch: expected {expected}, got {got}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("grid mismatch")]
    GridMismatch,
    #[error("non-uniform extents across components: {0}")]
    NonUniformExtents(String),
    #[error("extents violate lo_a <= lo_c <= 0 <= hi_c <= hi_a: {0:?}")]
    InvalidExtents([i64; 4]),
    #[error("window too small: need {needed} columns, have {have}")]
    WindowTooSmall { needed: usize, have: usize },
    #[error("identically zero determinant")]
    IdenticallyZeroDeterminant,
    #[error("null space dimension mismatch at z = {root}: multiplicity {multiplicity}, null space {nullity}")]
    NullSpaceMismatch {
        root: num_complex::Complex64,
        multiplicity: usize,
        nullity: usize,
    },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },
    #[error("Krylov solver did not converge after {iterations} iterations (residual {residual:e})")]
    KrylovStalled { iterations: usize, residual: f64 },
    #[error("singular system: {0}")]
    SingularSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
