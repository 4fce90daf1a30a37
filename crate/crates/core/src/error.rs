use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: expected (d={expected_d}, n={expected_n}), got (d={got_d}, n={got_n})")]
    GridMismatch {
        expected_d: usize,
        expected_n: usize,
        got_d: usize,
        got_n: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("multiplier is not finite at frequency {0:?}")]
    NonFiniteMultiplier(Vec<i64>),

    #[error("{name} = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("field must have zero mean: |coefficient at k=0| = {coeff:.3e} exceeds {tol:.3e}")]
    NonZeroMean { coeff: f64, tol: f64 },

    #[error("{constraint} residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ConstraintResidual {
        constraint: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("operation requires {expected} components, field has {got}")]
    ComponentMismatch { expected: usize, got: usize },

    #[error("dimension d={d} unsupported here: requires {constraint}")]
    UnsupportedDimension { d: usize, constraint: &'static str },

    #[error("zero frequency mode is not allowed here")]
    ZeroMode,

    #[error("duplicate or negation-related mode {0:?}")]
    DuplicateMode(Vec<i64>),

    #[error("mode {0:?} touches the Nyquist row and cannot generate a real pair")]
    NyquistMode(Vec<i64>),

    #[error("mode {0:?} does not fit the frequency lattice")]
    ModeOutOfRange(Vec<i64>),

    #[error("polarization {polarization:?} is not transverse to mode {mode:?} (|dot| = {dot:.3e})")]
    NonTransverse {
        mode: Vec<i64>,
        polarization: Vec<f64>,
        dot: f64,
    },

    #[error("band {band} too large for grid (limit {limit})")]
    BandTooLarge { band: f64, limit: f64 },

    #[error("family has {available} members but {needed} are required")]
    FamilyTooSmall { needed: usize, available: usize },

    #[error("requested {count} members but the constrained subspace has dimension {dim}")]
    SubspaceExceeded { count: usize, dim: usize },

    #[error("rank deficiency while orthonormalizing member {index}")]
    RankDeficient { index: usize },

    #[error("sequence is not sorted nonincreasing at position {index}")]
    NotSorted { index: usize },

    #[error("negative entry {value} at position {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("vectors are not orthonormal: max Gram deviation {deviation:.3e} exceeds {tol:.3e}")]
    NonOrthonormal { deviation: f64, tol: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("malformed field dump: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
