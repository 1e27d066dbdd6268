use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: routes disagree ({a:.17e} vs {b:.17e}, allowed {tol:.3e})")]
    MethodDisagreement {
        what: &'static str,
        a: f64,
        b: f64,
        tol: f64,
    },

    #[error("point {k} lies within {guard:.3e} of the integration contour")]
    ContourClash { k: String, guard: f64 },

    #[error("{what}: imaginary part {im:.3e} exceeds realness tolerance")]
    RealnessViolation { what: &'static str, im: f64 },

    #[error("k = {k} is within the guard radius of the pole at i*kappa")]
    PoleProximity { k: String },

    #[error("{what}: magnitude {magnitude:.3e} at the truncation ends")]
    TruncationLeak { what: &'static str, magnitude: f64 },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("solver residual {residual:.3e} exceeds {limit:.1e}")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("r^2 - w^2 - 1 = {defect:.3e}")]
    HyperbolicViolation { defect: f64 },

    #[error("kernel tail {tail:.3e} beyond the truncation of the {side} equation")]
    KernelTruncation { side: &'static str, tail: f64 },

    #[error("splitting point dependence {spread:.3e} exceeds tolerance")]
    SplitInconsistency { spread: f64 },

    #[error("Riccati solution exceeded {bound:.1e} at x = {x}")]
    BlowUp { x: f64, bound: f64 },

    #[error("asymptotic model has a non-positive denominator at x = {x}")]
    ModelPole { x: f64 },

    #[error("fit residual {residual:.3e} exceeds tolerance")]
    IllConditionedFit { residual: f64 },

    #[error("cosh(sigma) - sqrt(gamma) sinh(sigma) = {value:.3e} is not positive")]
    NegativeRadicand { value: f64 },

    #[error("tail nonlinearity {residual:.3e} exceeds tolerance")]
    FitResidualTooLarge { residual: f64 },

    #[error("regularized tail integrand does not decay: {detail}")]
    TailDivergence { detail: String },

    #[error("eigenvalue computation failed in trial {trial}")]
    EigenFailure { trial: u64 },

    #[error("{outside} of {total} samples fall outside the table range")]
    SupportMismatch { outside: usize, total: usize },
}

impl Error {
    /// Whether the error signals a failed numerical consistency check rather
    /// than bad input.
    pub fn is_numerical_check(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
