//! Trust formation and Dempster-Shafer trust aggregation for wireless mesh
//! networks.
//!
//! The crate is split along the pipeline a mesh node runs every monitoring
//! period:
//!
//! - [`trust`]: watchdog counters to direct trust (forwarding probability,
//!   entropy mapping, exponential smoothing, recommender weighting).
//! - [`dst`]: mass functions over `{T, ¬T}`, the dissimilarity test,
//!   Dempster's rule and the direct-plus-recommendations fusion.
//! - [`aggregators`]: the comparison schemes (linear opinion pooling, the
//!   entropy/Beta probability model, subjective logic, logistic mapping).
//! - [`bench`]: the star-topology badmouthing / ballot-stuffing sweep.

pub mod aggregators;
pub mod bench;
pub mod dst;
mod error;
pub mod trust;

pub use error::{Error, Result};
pub use trust::NodeId;

/// Tolerance used when validating that masses or opinion components sum to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}
