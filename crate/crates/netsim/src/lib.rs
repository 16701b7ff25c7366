//! Discrete-event simulation of a static wireless mesh running on-demand
//! source routing, with watchdog monitoring, recommendation exchange,
//! evidence fusion and blacklisting layered on top.
//!
//! Time advances in integer microseconds. Events at the same instant run in
//! insertion order, and every random draw comes from a per-node stream, so a
//! `(config, seed)` pair fully determines a run.

pub mod complexity;
pub mod config;
pub mod metrics;
pub mod node;
pub mod packet;
pub mod rng;
pub mod sim;
pub mod topology;

pub use config::{Attack, Scheme, SimConfig};
pub use metrics::{compute_metrics, Counters, MetricsReport};
pub use sim::{run_simulation, Simulator};
pub use topology::Topology;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("bad override `{key}`: {reason}")]
    Override { key: String, reason: String },
    #[error(transparent)]
    Trust(#[from] dstrust_core::Error),
}

impl SimError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        SimError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Whether the error stems from the configuration rather than the run.
    pub fn is_config(&self) -> bool {
        !matches!(self, SimError::Trust(_))
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
