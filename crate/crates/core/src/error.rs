use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("overheard count {overheard} exceeds sent count {sent}")]
    OverheardExceedsSent { sent: u64, overheard: u64 },

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("{name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("components sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("total conflict between mass functions (K = {conflict})")]
    TotalConflict { conflict: f64 },

    #[error("consensus of two dogmatic opinions is undefined")]
    DogmaticConsensus,

    #[error("no evidence to aggregate")]
    NoEvidence,

    #[error("feature vector has {features} entries but model has {coefficients} coefficients")]
    LengthMismatch { features: usize, coefficients: usize },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("invalid override `{key}`: {reason}")]
    InvalidOverride { key: String, reason: String },
}
