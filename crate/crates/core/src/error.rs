use thiserror::Error;

/// Errors raised by grid construction, the estimate checks and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; only N = 3, 4, 5 are covered")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field must vanish at r = R, found {0}")]
    BoundaryValue(f64),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("singular pivot in tridiagonal solve at row {0}")]
    SingularPivot(usize),

    #[error("tail estimate too large at cutoff {cutoff}: relative tail {relative_tail:e}")]
    TailTooLarge { cutoff: f64, relative_tail: f64 },

    #[error("delta = {delta} outside the admissible window ({lower}, {upper}) for N = {dim}")]
    DeltaOutsideWindow {
        delta: f64,
        lower: f64,
        upper: f64,
        dim: usize,
    },

    #[error("sweep needs at least {required} values, got {got}")]
    SweepTooShort { required: usize, got: usize },

    #[error("non-monotone data for {quantity} at eps = {eps:e} (grid or quadrature under-resolved)")]
    NonMonotone { quantity: String, eps: f64 },

    #[error("grid under-resolved at eps = {eps:e}: local spacing {spacing:e}")]
    UnderResolved { eps: f64, spacing: f64 },

    #[error("weight violates the half-value condition on the plateau: min {min} < w(0)/2 = {half}")]
    HalfValueCondition { min: f64, half: f64 },

    #[error("weight is not positive at r = {0}")]
    NonPositiveWeight(f64),

    #[error("no point with negative energy found along the first eigenfunction (min J = {0:e})")]
    NoNegativeEnergy(f64),

    #[error("ball constraint active at convergence: norm {norm} reached radius {rho}")]
    ConstraintActive { norm: f64, rho: f64 },

    #[error("parameters outside the admissible regions: {0}")]
    OutsideRegion(String),

    #[error("no interior maximiser along the ray (bracketing failed at beta = {0})")]
    Bracketing(f64),

    #[error("mountain-pass path collapsed toward the local minimum (max energy {0:e})")]
    PathCollapse(f64),

    #[error(
        "mountain-pass stagnation after {iterations} iterations: residual {residual:e}, \
         energy {energy}, morse index {morse_index}"
    )]
    Stagnation {
        iterations: usize,
        residual: f64,
        energy: f64,
        morse_index: usize,
    },

    #[error("sampled energy {0:e} on the sphere is not positive")]
    SphereFloor(f64),

    #[error("{0}")]
    Rejected(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
