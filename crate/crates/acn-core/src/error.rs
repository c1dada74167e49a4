use thiserror::Error;

/// Errors produced by pattern parsing, configuration checks, and the design
/// searches.
#[derive(Debug, Error)]
pub enum AcnError {
    /// A pattern definition is unusable (too few samples, bad parameter range).
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    /// A pattern CSV file failed to parse; `line` is 1-based.
    #[error("pattern parse error at line {line}: {reason}")]
    PatternParse { line: usize, reason: String },

    /// Inconsistent inputs (mismatched lengths, out-of-range parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// An antenna index outside `0..L`.
    #[error("antenna index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    /// An argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// No feasible design exists for the requested antenna count.
    #[error("infeasible design: {0}")]
    Infeasible(String),

    /// A search grid too coarse to be meaningful.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
