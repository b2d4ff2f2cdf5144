use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("theta = 0 has no finite objective here; use the zero-theta objective")]
    ZeroTheta,

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error(
        "unstable queue: arrival {arrival} bits/frame is not below mean service {mean_service} bits/frame"
    )]
    Unstable { arrival: f64, mean_service: f64 },

    #[error("tail estimation needs at least {needed} usable thresholds, found {found} ({diagnostic})")]
    InsufficientTail {
        needed: usize,
        found: usize,
        diagnostic: String,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
