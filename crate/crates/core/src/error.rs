use thiserror::Error;

/// Errors produced by the library.
///
/// Everything except [`Error::Io`] is a validation failure: the caller handed
/// in something outside an operation's domain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid alpha `{text}`: {reason}")]
    InvalidAlpha { text: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential must be bounded (sample at n={n} is {value})")]
    UnboundedPotential { n: i64, value: f64 },

    #[error("window too small: need indices [{need_lo}, {need_hi}], have [{have_lo}, {have_hi}]")]
    WindowTooSmall {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("orbit not injective on range: T^{i} and T^{j} coincide")]
    OrbitNotInjective { i: i64, j: i64 },

    #[error("tube condition ({condition}) violated: {detail}")]
    TubeCondition { condition: char, detail: String },

    #[error("not in Omega_f sample set")]
    NotInTube,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular matrix (|det| = {0:e})")]
    SingularMatrix(f64),

    #[error("vector is not unit length (norm = {0})")]
    NotUnitVector(f64),

    #[error("inverse iteration did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
