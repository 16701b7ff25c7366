//! Direct trust from watchdog observations.
//!
//! A node hands packets to a downstream neighbour and counts how many of
//! them it later overhears being retransmitted. Once per monitoring period
//! the ratio is mapped through the binary entropy function into a trust
//! value and blended with the previous value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{check_unit, Error, Result};

/// Trust assigned to a neighbour that has never been observed.
///
/// This is the fixed point of [`entropy_trust`], i.e. maximum uncertainty.
pub const BOOTSTRAP_TRUST: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(id: u32) -> Self {
        NodeId(id)
    }
}

/// Parameters of the monitoring and decision stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustConfig {
    /// Detection threshold; a fused trust below it marks the node as misbehaving.
    pub gamma: f64,
    /// Length of a monitoring period in seconds.
    pub period: f64,
    /// Weight of the current observation in exponential smoothing.
    pub alpha: f64,
    /// Whether recommendations are weighted by the trust in the recommender.
    pub recommender_weighting: bool,
}

impl Default for TrustConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            period: 20.0,
            alpha: 0.5,
            recommender_weighting: true,
        }
    }
}

impl TrustConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "must lie in (0, 1)",
            });
        }
        check_unit("alpha", self.alpha)?;
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "period",
                value: self.period,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

/// Per-neighbour direct-trust state held by an observing node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRecord {
    pub subject: NodeId,
    packets_sent: u64,
    packets_overheard: u64,
    smoothed_trust: f64,
    /// Simulation time (seconds) of the last period close that carried evidence.
    pub last_update: f64,
}

impl TrustRecord {
    pub fn new(subject: NodeId) -> Self {
        Self {
            subject,
            packets_sent: 0,
            packets_overheard: 0,
            smoothed_trust: BOOTSTRAP_TRUST,
            last_update: 0.0,
        }
    }

    pub fn packets_sent(&self) -> u64 {
        self.packets_sent
    }

    pub fn packets_overheard(&self) -> u64 {
        self.packets_overheard
    }

    pub fn smoothed_trust(&self) -> f64 {
        self.smoothed_trust
    }

    pub fn record_sent(&mut self) {
        self.packets_sent += 1;
    }

    /// Counts a confirmed forwarding. Fails if it would exceed the packets sent.
    pub fn record_overheard(&mut self) -> Result<()> {
        if self.packets_overheard >= self.packets_sent {
            return Err(Error::OverheardExceedsSent {
                sent: self.packets_sent,
                overheard: self.packets_overheard + 1,
            });
        }
        self.packets_overheard += 1;
        Ok(())
    }

    /// Withdraws a previously counted hand-off, e.g. when the neighbour
    /// reported a route error for it or the expectation moved to the next period.
    pub fn retract_sent(&mut self) {
        debug_assert!(self.packets_sent > self.packets_overheard);
        if self.packets_sent > self.packets_overheard {
            self.packets_sent -= 1;
        }
    }

    /// Closes the monitoring period: converts the counters into a raw trust,
    /// folds it into the smoothed value and resets the counters.
    ///
    /// Returns the raw trust, or `None` when nothing was sent this period, in
    /// which case the smoothed trust is carried over unchanged.
    pub fn close_period(&mut self, now: f64, alpha: f64) -> Result<Option<f64>> {
        let observed = forwarding_probability(self.packets_sent, self.packets_overheard)?;
        self.packets_sent = 0;
        self.packets_overheard = 0;
        let Some(p_f) = observed else {
            return Ok(None);
        };
        let raw = entropy_trust(p_f)?;
        self.smoothed_trust = smooth(raw, self.smoothed_trust, alpha)?;
        self.last_update = now;
        Ok(Some(raw))
    }
}

/// Fraction of handed-off packets that were overheard being forwarded.
///
/// `Ok(None)` means no packets were handed off, so there is no evidence.
pub fn forwarding_probability(sent: u64, overheard: u64) -> Result<Option<f64>> {
    if overheard > sent {
        return Err(Error::OverheardExceedsSent { sent, overheard });
    }
    if sent == 0 {
        return Ok(None);
    }
    Ok(Some(overheard as f64 / sent as f64))
}

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Maps a forwarding probability onto `[0, 1]` through the binary entropy.
///
/// Probabilities at or above one half map to `1 - H/2`, below to `H/2`, so
/// the map is continuous, nondecreasing and symmetric about `(0.5, 0.5)`.
pub fn entropy_trust(p_f: f64) -> Result<f64> {
    check_unit("forwarding probability", p_f)?;
    let h = binary_entropy(p_f);
    Ok(if p_f >= 0.5 { 1.0 - 0.5 * h } else { 0.5 * h })
}

/// Exponential smoothing `alpha * raw + (1 - alpha) * previous`, clamped to `[0, 1]`.
pub fn smooth(raw: f64, previous: f64, alpha: f64) -> Result<f64> {
    check_unit("raw trust", raw)?;
    check_unit("previous trust", previous)?;
    check_unit("alpha", alpha)?;
    Ok((alpha * raw + (1.0 - alpha) * previous).clamp(0.0, 1.0))
}

/// Indirect trust: the recommendation discounted by the trust in the recommender.
pub fn indirect_trust(trust_in_recommender: f64, recommended_trust: f64) -> Result<f64> {
    check_unit("trust in recommender", trust_in_recommender)?;
    check_unit("recommended trust", recommended_trust)?;
    Ok(trust_in_recommender * recommended_trust)
}
