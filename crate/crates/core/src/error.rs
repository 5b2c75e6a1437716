use thiserror::Error;

use crate::vectors::Scalar;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("sign-sum membership search exceeded its node budget of {budget}")]
    DepthExceeded { budget: u64 },

    #[error("{what} exceeds the configured budget of {limit}")]
    BudgetExceeded { what: String, limit: u64 },

    #[error("witness #{index} is not a member of the set")]
    WitnessNotMember { index: usize },

    #[error("set is unbounded under the {norm} norm")]
    Unbounded { norm: &'static str },

    #[error("no certificate direction yields an orthogonal functional above {lambda}")]
    NoCertificate { lambda: Scalar },

    #[error("extraction stalled at step {step}")]
    ExtractionStalled {
        step: usize,
        partial: Box<crate::extraction::ExtractionTranscript>,
    },

    #[error("refinement did not reach the target ratio; best ratio {best_ratio}")]
    NotFound { best_ratio: Scalar },

    #[error("eps-tree stalled at node {node}")]
    TreeStalled { node: usize },

    #[error("one-sided sequence stalled at step {step}")]
    Stalled { step: usize },

    #[error("diameter interval straddles the threshold")]
    Inconclusive,

    #[error("no witness set within budget certifies the tail bound (best half-diameter {best})")]
    NotAchievable {
        best: Scalar,
        lower_certificate: Option<Box<crate::indexes::DeltaResult>>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by exhausting a search budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::DepthExceeded { .. } | Error::BudgetExceeded { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
