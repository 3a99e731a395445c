use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scalar mode mismatch: {0}")]
    ScalarModeMismatch(String),
    #[error("variable index {var} out of range for {d} variables")]
    VarOutOfRange { var: usize, d: usize },
    #[error("zero constant term: {0}")]
    ZeroConstantTerm(String),
    #[error("substitution not centered: component {component} has constant term {got}, base point requires {required}")]
    CenteringViolated {
        component: usize,
        got: String,
        required: String,
    },
    #[error("singular base Jacobian in map inversion")]
    SingularJacobian,
    #[error("map inversion did not stabilize within {0} rounds (inconsistent truncation data)")]
    InversionDiverged(usize),
    #[error("Hermitian symmetry violated at ({alpha:?}, {beta:?})")]
    SymmetryViolated { alpha: Vec<u32>, beta: Vec<u32> },
    #[error("model is not Bochner-normalized: {0}")]
    NotBochner(String),
    #[error("point outside evaluable region: {0}")]
    OutsideEvaluableRegion(String),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource cap exceeded, deepest index reached: {0}")]
    ResourceCap(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("term budget {budget} exhausted before the cutoff closed the sum (displacement too small)")]
    TermBudgetExceeded { budget: usize },
    #[error("derivative magnitudes at or below noise floor; fit refused")]
    BelowNoiseFloor,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
