use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Malformed permutation text, out-of-range symbol, or a non-bijective
    /// image list. `position` is a byte offset into the offending input.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// A structurally valid input that violates an operation precondition
    /// (e.g. q = 0, or a depth/level argument of zero).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A requested cell resolution would exceed the configured cell budget.
    #[error("cell capacity exceeded: need {needed} cells, limit is {limit}")]
    Capacity { needed: u128, limit: usize },

    /// The composed substitution words stopped growing, so no infinite
    /// coding word exists at this resolution (happens for some power-of-two q).
    #[error("fixed point stalled at length {reached}")]
    FixedPointStalled { reached: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;
