use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Doubling the number of branch-phase nodes moved the result more than allowed.
    #[error("{quantity} did not converge: doubling to {nodes} phase nodes changed it by {change:.3e} (limit {limit:.1e})")]
    NonConvergence {
        quantity: &'static str,
        nodes: usize,
        change: f64,
        limit: f64,
    },

    #[error("Fock truncation too lossy: estimated discarded probability {loss:.3e} exceeds {limit:.1e}")]
    TruncationTooLossy { loss: f64, limit: f64 },

    #[error("distributions disagree on non-angle parameters: {0}")]
    InconsistentConfigs(String),

    #[error("dead zone has zero width but the photon-number threshold is {n0}")]
    DegenerateDeadZone { n0: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::TruncationTooLossy { .. }
        )
    }
}
