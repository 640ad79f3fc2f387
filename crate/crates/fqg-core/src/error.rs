use thiserror::Error;

#[derive(Debug, Error)]
pub enum FqgError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("S_{n}({big_n}) overflows u128; use the real-valued variant")]
    DimOverflow { n: usize, big_n: usize },
    #[error("level {l} is not in {n} (x) {k}")]
    NotInFusion { n: usize, k: usize, l: usize },
    #[error("level {level} exceeds the configured max level {max}")]
    LevelBudget { level: usize, max: usize },
    #[error("{what} needs about {needed_mb} MB, over the {limit_mb} MB budget")]
    MemoryBudget { what: String, needed_mb: u64, limit_mb: u64 },
    #[error("word length {len} exceeds the configured max length {max}")]
    WordBudget { len: usize, max: usize },
    #[error("invariant violated: {what} (deviation {value:.3e} > {tol:.1e})")]
    Invariant { what: String, value: f64, tol: f64 },
    #[error("rank mismatch for {what}: got {got}, expected {expected}")]
    Rank { what: String, got: usize, expected: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("linear algebra failure: {0}")]
    Numerics(String),
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FqgError>;

pub(crate) fn check(what: impl Into<String>, value: f64, tol: f64) -> Result<()> {
    if value.is_finite() && value <= tol {
        Ok(())
    } else {
        Err(FqgError::Invariant { what: what.into(), value, tol })
    }
}
