use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("quasi-inverse needs a zero constant term")]
    NonzeroConstant,
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("no objects of size {n}: {reason}")]
    Infeasible { n: usize, reason: String },
    #[error("class is not supercritical (nu <= 1): {0}")]
    Subcritical(String),
    #[error("series diverges at t = {0}")]
    Divergent(f64),
    #[error("table order {have} is too small, need {need}")]
    OrderTooSmall { have: usize, need: usize },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid decorated tree: {0}")]
    InvalidTree(String),
    #[error("invalid weight model: {0}")]
    InvalidWeights(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("checksum mismatch in {0}")]
    Checksum(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
