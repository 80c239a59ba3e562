use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("invalid measure: {0}")]
    Semantic(String),

    #[error("weight is not integrable: {0}")]
    Integrability(String),

    #[error("operation requires a {expected} measure")]
    WrongDomain { expected: &'static str },

    #[error("recurrence breakdown at index {index}: coefficient {value:e} is below tolerance (measure has too few points of increase)")]
    Breakdown { index: usize, value: f64 },

    #[error("orthogonality drift {drift:e} exceeds {tolerance:e}; increase the node count")]
    OrthogonalityDrift { drift: f64, tolerance: f64 },

    #[error("degree {degree} exceeds the cap {cap} for a discretization with M = {resolution}")]
    DegreeCap {
        degree: usize,
        cap: usize,
        resolution: usize,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("unimodularity violated: max ||z| - 1| = {deviation:e}")]
    Unimodularity { deviation: f64 },

    #[error("evaluation overflow at x = {x}: |p_k| exceeded 1e280")]
    Overflow { x: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    /// True for failures caused by floating-point or algorithmic limits
    /// rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integrability(_)
                | Error::Breakdown { .. }
                | Error::OrthogonalityDrift { .. }
                | Error::NonConvergence { .. }
                | Error::Unimodularity { .. }
                | Error::Overflow { .. }
        )
    }
}
