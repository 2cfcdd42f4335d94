use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vector {index} is not normalised (norm {norm})")]
    NotNormalised { index: usize, norm: f64 },
    #[error("symbols from different alphabets")]
    MixedAlphabet,
    #[error("basis too large: {rows} moment rows exceeds cap {cap}")]
    CapExceeded { rows: usize, cap: usize },
    #[error("word {0} is not representable at this hierarchy level")]
    NotRepresentable(String),
    #[error("invalid explicit model: {0}")]
    InvalidModel(String),
    #[error("equality constraints are inconsistent (violation {0:e})")]
    Inconsistent(f64),
    #[error("SDPA parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
