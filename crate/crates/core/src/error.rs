use thiserror::Error;

/// Errors raised by the model, solver, and enumeration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PottsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("value {value} is not one of the spin levels")]
    UnknownLevel { value: f64 },

    #[error("moments outside the probability simplex: p[{index}] = {value}")]
    OutOfDomain { index: usize, value: f64 },

    #[error("point lies on the simplex boundary (p[{index}] = {value}); logarithms are singular")]
    SingularDomain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("system size N = {n} outside the supported range [1, {max}]")]
    Size { n: usize, max: usize },

    #[error("invalid thermodynamic point: {0}")]
    InvalidPoint(String),

    #[error("m2 = {m2} outside the locus domain [{lo}, {hi}]")]
    LocusDomain { m2: f64, lo: f64, hi: f64 },

    #[error("field map diverges at m2 = {m2}")]
    InfiniteField { m2: f64 },

    #[error("equation-of-state solver found no roots")]
    SolverFailure,

    #[error("no local maximum of the free energy among {0} branches")]
    DegenerateSet(usize),

    #[error("point is too close to a fold (|J| = {0:e})")]
    NearFold(f64),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, PottsError>;
