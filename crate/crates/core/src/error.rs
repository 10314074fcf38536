use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {dim} is outside the admissible range for lambda = {lambda} (need 3 <= N <= 6, or N >= 3 when lambda = 0)")]
    Dimension { dim: usize, lambda: f64 },

    #[error("r_max must be positive and finite, got {0}")]
    RadiusNotPositive(f64),

    #[error("grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("field has {field} values but the grid has {grid} nodes")]
    SizeMismatch { field: usize, grid: usize },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("L^p exponent must satisfy p >= 1, got {0}")]
    Exponent(f64),

    #[error("derivative order {0} is outside 0..=4")]
    DerivativeOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is zero (or below the 1e-12 amplitude floor)")]
    ZeroField,

    #[error(
        "fibering derivative has no sign change on the scanned interval [{t_min:e}, {t_max:e}]; rescale the field"
    )]
    NoProjection { t_min: f64, t_max: f64 },

    #[error("projection residual {residual:e} exceeds tolerance {tolerance:e}")]
    ProjectionTolerance { residual: f64, tolerance: f64 },

    #[error("no start could be projected onto the Nehari manifold")]
    AllStartsFailed,

    #[error("hypothesis check failed: {0}")]
    HypothesesFailed(String),

    #[error("lambda list must be non-empty, ascending and non-negative")]
    LambdaOrder,
}

pub type Result<T> = std::result::Result<T, Error>;
