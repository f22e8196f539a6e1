use thiserror::Error;

/// Errors raised by the geometry, integration and relaxation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("combinatorial blowup: {what} for n = {n} needs {count} items, above the cap n <= {cap}")]
    CombinatorialBlowup {
        what: &'static str,
        n: usize,
        count: String,
        cap: usize,
    },

    #[error("coefficients are not generic: subset {subset:?} (0-based) sums to {sum:e}")]
    NotGeneric { subset: Vec<usize>, sum: f64 },

    #[error("rank-deficient generator matrix: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("point outside the function domain: {0}")]
    DomainViolation(String),

    #[error("binary64 range exceeded: exponent {exponent:e}")]
    Range { exponent: f64 },

    #[error("exponent must be an integer, got {0}")]
    NonIntegerExponent(f64),

    #[error("negative base {base:e} raised to non-integer power {exponent}")]
    NegativeBase { base: f64, exponent: f64 },

    #[error("function is not supermodular on the box vertices; the Kuhn interpolant is not its concave envelope")]
    NotSupermodular,

    #[error("function is not positively homogeneous")]
    NotHomogeneous,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("degenerate naive-relaxation volume {0:e}; cut-off ratio undefined")]
    DegenerateVolume(f64),

    #[error("point {0:?} lies outside the box")]
    OutsideBox(Vec<f64>),
}

pub type Result<T> = std::result::Result<T, Error>;
