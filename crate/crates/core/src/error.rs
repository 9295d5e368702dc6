use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: curvature tensors need n >= 2")]
    InvalidDimension(usize),

    #[error("dimension {n} is not supported by {operation}")]
    UnsupportedDimension { n: usize, operation: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("array of length {len} is not a 4-index array of dimension {n}")]
    ShapeMismatch { n: usize, len: usize },

    #[error("vectors span a degenerate plane")]
    DegeneratePlane,

    #[error("sectional-curvature oracle returned a non-finite value")]
    NonFiniteOracle,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conformal factor must be positive, found {value} at node {node}")]
    NonPositiveFactor { node: usize, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("Euler characteristic is zero; the bound is vacuous")]
    VacuousEuler,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("step size underflow at t = {t} (dt = {dt})")]
    StepSize { t: f64, dt: f64 },

    #[error("flow is too stiff: positivity lost after {halvings} step halvings at t = {t}")]
    Stiffness { t: f64, halvings: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
