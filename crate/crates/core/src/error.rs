use thiserror::Error;

/// Failures surfaced by the numerical pipeline.
///
/// Variants carry enough context to tell the caller what to change; the
/// command-line front end maps them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frame is not Lagrangian: isotropy residual {residual:.3e} exceeds {tol:.3e}")]
    NotLagrangian { residual: f64, tol: f64 },

    #[error("frame is rank deficient: smallest singular value {sigma_min:.3e} below {tol:.3e}")]
    RankDeficient { sigma_min: f64, tol: f64 },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("matrix is not hermitian: residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("Robin pair is invalid: {0}")]
    InvalidRobinPair(String),

    #[error("X - iY is numerically singular (frame is not Lagrangian)")]
    SingularCayley,

    #[error(
        "intersection dimension disagrees: rank method {by_rank}, unitary method {by_unitary}"
    )]
    IntersectionDisagreement { by_rank: usize, by_unitary: usize },

    #[error("symplecticity residual {residual:.3e} exceeds {tol:.3e}; increase the step count")]
    SymplecticityExceeded { residual: f64, tol: f64 },

    #[error("invalid interval or step count: {0}")]
    InvalidInterval(String),

    #[error("energy {energy} is not in a spectral gap (circle margin {margin:.3e})")]
    NotInGap { energy: f64, margin: f64 },

    #[error(
        "energy {energy} is too close to a band edge to classify (margin {margin:.3e}); perturb E"
    )]
    UndecidedEnergy { energy: f64, margin: f64 },

    #[error("stable subspace has dimension {got}, expected {expected}; energy misclassified")]
    StableDimension { expected: usize, got: usize },

    #[error("ordered Schur reordering failed: {0}")]
    SchurReorder(String),

    #[error("potential family violates its contract: {0}")]
    InvalidPotential(String),

    #[error("discretization is invalid: {0}")]
    InvalidDiscretization(String),

    #[error("switch function violates its plateau contract: {0}")]
    InvalidSwitch(String),

    #[error("non-regular crossing near t = {t:.6}: {reason}; perturb E")]
    NonRegular { t: f64, reason: String },

    #[error("refinement budget exhausted near t = {t:.6}; increase N or the t-grid")]
    RefinementExhausted { t: f64 },

    #[error("sample {index} of the loop is within {tol:.1e} of zero")]
    ZeroSample { index: usize, tol: f64 },

    #[error("value {value:.4} is not within {tol} of an integer")]
    NotInteger { value: f64, tol: f64 },

    #[error("index characterizations disagree: {0}")]
    Inconsistent(String),

    #[error("Fourier truncation not converged: {0}")]
    TruncationNotConverged(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
