use thiserror::Error;

use crate::paramlab::ValidationError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("exponent r must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("exponent must be positive (or >= 1 for derivative moments), got {0}")]
    NonPositiveExponent(f64),
    #[error("theta must lie in (0, {max}], got {theta}")]
    ThetaOutOfRange { theta: f64, max: f64 },
    #[error("n = {n} is below the first usable block k0 = {k0}")]
    NTooSmall { n: u32, k0: u32 },
    #[error("block start k0 = {k0} is below the smallest valid start {min}")]
    BlockStartTooSmall { k0: u32, min: u32 },
    #[error("n = {n} is too large for theta = {theta}: block counts would overflow")]
    NTooLarge { n: u32, theta: f64 },
    #[error("bump train has {count} bumps, quadrature limit is {limit}")]
    TooManyBumps { count: u128, limit: u128 },
    #[error("grid dimension {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDim(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field dimension {field} does not match parameter dimension {params}")]
    DimensionMismatch { field: usize, params: u32 },
    #[error("Lebesgue exponent s must be >= 1, got {0}")]
    SOutOfRange(f64),
    #[error("window radius {radius} exceeds grid padding {padding}")]
    RadiusExceedsPadding { radius: usize, padding: usize },
    #[error("field is identically zero")]
    ZeroField,
    #[error("r = {r} lies outside the admissible range [{lo}, {hi}]")]
    ROutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("fit window needs at least {min} points, got {len}")]
    WindowTooShort { len: usize, min: usize },
    #[error("quadrature tolerance must be positive, got {0}")]
    BadTolerance(f64),
}
