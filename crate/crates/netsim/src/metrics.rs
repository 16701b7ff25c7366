//! Run counters and the derived report.

use std::collections::BTreeSet;

use dstrust_core::NodeId;
use serde::Serialize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub generated: u64,
    pub delivered: u64,
    pub dropped_attacker: u64,
    pub dropped_route_failure: u64,
    /// Data packets buffered or on the air when the run ended.
    pub in_flight: u64,
    /// RREQ, RREP and RERR transmissions.
    pub routing_control: u64,
    /// TRUST_REQ, TRUST_REP and BLACKLIST transmissions.
    pub trust_control: u64,
    /// Dempster combinations performed by all evaluators.
    pub fusion_ops: u64,
    pub fusion_calls: u64,
}

impl Counters {
    pub fn control(&self) -> u64 {
        self.routing_control + self.trust_control
    }

    /// Every generated packet is accounted for exactly once.
    pub fn conserved(&self) -> bool {
        self.generated == self.delivered + self.dropped_attacker + self.dropped_route_failure + self.in_flight
    }
}

/// When an attacker first received data to relay and when it was first
/// blacklisted by anyone. Times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub attacker: NodeId,
    pub first_carry_s: Option<f64>,
    pub blacklisted_s: Option<f64>,
}

impl Detection {
    pub fn latency_s(&self) -> Option<f64> {
        Some(self.blacklisted_s? - self.first_carry_s?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub pdr: f64,
    /// `None` when nothing was delivered.
    pub nro: Option<f64>,
    pub throughput_bps: f64,
    pub false_positive_rate: f64,
    pub detected: BTreeSet<NodeId>,
    pub detections: Vec<Detection>,
    /// How many nodes hold each blacklisted node in their blacklist.
    pub blacklist_counts: Vec<(NodeId, u32)>,
    pub counters: Counters,
}

/// Ratios over the counters. `false_positives` is the number of honest
/// nodes present in at least one blacklist.
pub fn compute_metrics(
    counters: &Counters,
    packet_size_bytes: u32,
    duration_s: f64,
    false_positives: usize,
    n_nodes: usize,
) -> MetricsReport {
    let pdr = if counters.generated == 0 {
        0.0
    } else {
        counters.delivered as f64 / counters.generated as f64
    };
    let nro = (counters.delivered > 0).then(|| counters.control() as f64 / counters.delivered as f64);
    let throughput_bps = counters.delivered as f64 * f64::from(packet_size_bytes) * 8.0 / duration_s;
    let false_positive_rate = if n_nodes == 0 {
        0.0
    } else {
        false_positives as f64 / n_nodes as f64
    };
    MetricsReport {
        pdr,
        nro,
        throughput_bps,
        false_positive_rate,
        detected: BTreeSet::new(),
        detections: Vec::new(),
        blacklist_counts: Vec::new(),
        counters: counters.clone(),
    }
}
