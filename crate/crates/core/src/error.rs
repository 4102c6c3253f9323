use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("time {t} outside history coverage [{start}, {end}]")]
    Coverage { t: f64, start: f64, end: f64 },
    #[error("direction outside the admissible cone: |omega3| = {omega3} < theta = {theta}")]
    OutsideCone { omega3: f64, theta: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("particle escaped: |q| = {radius} exceeds {limit} at t = {t}")]
    Escape { t: f64, radius: f64, limit: f64 },
    #[error("plane condition violated at t = {t}: |q3| + |p3| = {deviation}")]
    PlaneViolation { t: f64, deviation: f64 },
    #[error("decay fit needs at least {needed} usable points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("run has not converged: {0}")]
    NotConverged(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.into(), reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
