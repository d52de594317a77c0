//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("metric M(t) - I lost positivity at t = {t_s} s (min eigenvalue {min_eig:.3e}); shorten t or raise eta0")]
    MetricNotPositive { t_s: f64, min_eig: f64 },

    #[error("state norm overflow: grew beyond 1e12 x initial during propagation")]
    NormOverflow,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("singular shift: alpha coincides with an eigenvalue")]
    SingularShift,

    #[error("integration step too coarse: halving the step changed the endpoint by {0:.3e}")]
    StepTooCoarse(f64),

    #[error("linear system is singular or ill-conditioned: {0}")]
    SingularSystem(String),

    #[error("no consistent solution: {0}")]
    NoSolution(String),

    #[error("fit window too wide: quadratic residual {0:.3e} exceeds the linear-model budget")]
    WindowTooWide(f64),

    #[error("degenerate fit: residual Hessian is singular at the optimum")]
    DegenerateFit,

    #[error("root matching ambiguous near a degeneracy; reporting sorted statistics instead")]
    MatchingAmbiguous,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
