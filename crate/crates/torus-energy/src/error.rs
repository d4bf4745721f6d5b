use thiserror::Error;

/// Errors produced by kernel construction, configuration handling and the
/// energy/minimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cell dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("cell periods must be positive")]
    NonPositivePeriod,
    #[error("Gaussian width parameter t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("mode_cap must be at least 1, got {0}")]
    ModeCapTooSmall(usize),
    #[error("negative Fourier coefficient {value} at mode {mode:?}")]
    NegativeCoefficient { mode: Vec<i64>, value: f64 },
    #[error("non-finite Fourier coefficient at mode {mode:?}")]
    NonFiniteCoefficient { mode: Vec<i64> },
    #[error("positivity violated at n={mode:?}: coefficient is zero")]
    PositivityViolated { mode: Vec<i64> },
    #[error("mode {mode:?} is outside the stored mode box (cap {cap})")]
    ModeOutsideBox { mode: Vec<i64>, cap: usize },
    #[error("requested cap {requested} exceeds kernel storage (cap {stored})")]
    CapExceedsStorage { requested: usize, stored: usize },
    #[error("L must be divisible by 3")]
    LNotDivisibleBy3,
    #[error("L must be at least 3, got {0}")]
    LTooSmall(usize),
    #[error("N out of range: {0}")]
    BadPointCount(String),
    #[error("expected {expected} triplet generators, got {got}")]
    GeneratorCount { expected: usize, got: usize },
    #[error("constraint mismatch: {0}")]
    ConstraintMismatch(String),
    #[error("cell mismatch between kernel and configuration")]
    CellMismatch,
    #[error("configuration size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("K must satisfy 1 <= K <= N/2, got K={k}, N={n}")]
    NewtonRange { k: usize, n: usize },
    #[error("the triplet constraint requires the (sqrt(3), 1) cell")]
    TripletCell,
    #[error("kernel is not 1-dimensional")]
    NotOneDimensional,
    #[error("kernel is not 2-dimensional")]
    NotTwoDimensional,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed kernel spec: {0}")]
    KernelSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
