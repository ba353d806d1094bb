use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("base admissibility fails: {0}")]
    InadmissibleBase(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("resolution {0} is below the minimum of 8 nodes per axis")]
    BadResolution(usize),
    #[error("non-integrable weight: exponent {exponent} in {axis} at an axis cell")]
    DivergentWeight { axis: &'static str, exponent: f64 },
    #[error("sphere average diverges: exponent {t} <= -{k}")]
    Divergent { t: f64, k: u32 },
    #[error("denominator vanished")]
    ZeroDenominator,
    #[error("operation requires p = 2, got p = {0}")]
    WrongP(f64),
    #[error("support radius {support} is too large for h = {h}")]
    SupportOverlap { support: f64, h: f64 },
    #[error("bad cutoff radii ({0}, {1})")]
    BadRadii(f64, f64),
    #[error("solver diverged: line search failed {0} times in a row")]
    Diverged(usize),
    #[error("optimal constant is zero: {0}")]
    NotPositive(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
