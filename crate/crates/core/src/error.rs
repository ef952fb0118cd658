use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("t = {t} is outside the domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("two-sided derivative of order {order} requested at non-smooth breakpoint t = {t}")]
    SideRequired { t: f64, order: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("expression parse error at token {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("quadrature on [{a}, {b}] did not converge (error estimate {error:e})")]
    NoConvergence { a: f64, b: f64, error: f64 },

    #[error("one-sided limit at t = {t} did not stabilize")]
    Divergent { t: f64 },

    #[error("[{lo}, {hi}] does not bracket a sign change")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("smoothness requirement violated: {0}")]
    Smoothness(String),

    #[error("flat-top condition required, but rho(1) + rho'(1) = {value}")]
    FlatTopRequired { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("at least {min} samples required, got {got}")]
    InsufficientSamples { min: usize, got: usize },

    #[error("unsupported dimension {0}")]
    Dimension(usize),

    #[error("variable convention mismatch: {0}")]
    Variable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
