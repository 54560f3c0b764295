//! Crate-wide error type.

/// Errors surfaced by geometry operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("chart jacobian is rank-deficient at the evaluated point (not an immersion)")]
    NotImmersion,

    #[error("metric is not positive definite (smallest eigenvalue {min_eig:.3e} <= floor {floor:.3e})")]
    DegenerateMetric { min_eig: f64, floor: f64 },

    #[error("point violates Stiefel constraints (|z|^2 - 1 = {norm_dev:.3e}, |bil(z,z)| = {bil_dev:.3e})")]
    NotOnStiefel { norm_dev: f64, bil_dev: f64 },

    #[error("vector is not a horizontal quadric tangent (|herm(w,z)| = {herm_dev:.3e}, |bil(z,w)| = {bil_dev:.3e})")]
    NotTangent { herm_dev: f64, bil_dev: f64 },

    #[error("tangent vectors are based at different Stiefel representatives")]
    BaseMismatch,

    #[error("frame is not adapted: angle decomposition residual {residual:.3e} exceeds {tol:.3e}")]
    FrameNotAdapted { residual: f64, tol: f64 },

    #[error("angle {theta} is at a branch endpoint; cotangent undefined")]
    UndefinedCot { theta: f64 },

    #[error("principal curvatures too close (gap {gap:.3e}); angle-difference invariant undefined")]
    InvariantUndefined { gap: f64 },

    #[error("parameter t = {t} is degenerate (angle margin {margin:.3e} < {threshold:.3e}); use AUTO selection")]
    DegenerateParameter { t: f64, margin: f64, threshold: f64 },

    #[error("input is not Lagrangian or under-resolved (loop residual {residual:.3e} > {tol:.3e})")]
    NotLagrangian { residual: f64, tol: f64 },

    #[error("empty sample grid")]
    EmptyGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("chart produced a non-finite value at the evaluated point")]
    NonFiniteChart,

    #[error("second fundamental form routes disagree (residual {residual:.3e} > {tol:.3e})")]
    SecondFormMismatch { residual: f64, tol: f64 },

    #[error("differentiation step underflow")]
    StepUnderflow,
}

pub type Result<T> = std::result::Result<T, Error>;
