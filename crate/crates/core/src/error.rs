use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("missing context: {0}")]
    MissingContext(String),

    #[error("divergent moment: I(a={a}, b={b}) requires 2a - b > N = {dim}")]
    Divergent { a: f64, b: f64, dim: usize },

    /// Tolerance not reached within the subdivision budget. The best estimate
    /// obtained so far is carried along.
    #[error("quadrature did not converge: value {value:e} +/- {error:e} after {cells} cells")]
    ConvergenceFailure { value: f64, error: f64, cells: usize },

    #[error("singular gradient of K at the origin (K'(0) = {0:e})")]
    SingularGradient(f64),

    #[error("point has zero projection onto the cell plane; membership is ambiguous")]
    AmbiguousMembership,

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("no balance: Laplacian of K at r0 is {0:e} (must be negative)")]
    NoBalance(f64),

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("no interior stationary point: {0}")]
    BoundaryHit(String),

    #[error("field does not decay: {0}")]
    NonDecaying(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
