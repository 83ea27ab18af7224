use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("degenerate atom `{atom}`: column is zero on every design point")]
    DegenerateAtom { atom: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("predictor entry {value:.3e} exceeds the clip bound {clip}")]
    Overflow { value: f64, clip: f64 },

    #[error("power iteration did not converge within {cap} iterations")]
    NoConvergence { cap: usize },

    #[error("objective diverged at iteration {iteration}")]
    Divergence { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
