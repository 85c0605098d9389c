use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radius {s} is outside the domain of the warp profile (starts at {start}, {closure})")]
    Domain {
        s: f64,
        start: f64,
        closure: &'static str,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "tail exponent {beta} <= 1/2: the exterior harmonic problem has no decaying solution \
         (f^-2 is not integrable at infinity)"
    )]
    Nonparabolic { beta: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("warp table: {0}")]
    Table(String),
}
