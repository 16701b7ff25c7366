//! Per-node protocol state.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use dstrust_core::trust::TrustRecord;
use dstrust_core::NodeId;
use rand_chacha::ChaCha8Rng;

use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Role {
    Honest,
    /// Answers every route request with a fake reply and drops all data.
    Blackhole,
    /// Routes honestly, drops each data packet with the given probability.
    Grayhole {
        drop_prob: f64,
    },
}

impl Role {
    pub fn is_honest(self) -> bool {
        self == Role::Honest
    }
}

/// A data packet handed to `forwarder` that has not yet been overheard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expectation {
    pub forwarder: NodeId,
    pub since_us: u64,
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub id: u64,
    pub attempt: u32,
    /// Replies that arrived at the selection instant.
    pub candidates: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone)]
pub struct TrustQuery {
    pub target: NodeId,
    pub replies: Vec<(NodeId, f64)>,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub role: Role,
    pub records: BTreeMap<NodeId, TrustRecord>,
    /// Subjects whose record has absorbed at least one period of evidence.
    pub evidence: BTreeSet<NodeId>,
    pub blacklist: BTreeSet<NodeId>,
    /// Source routes keyed by destination, both endpoints included.
    pub routes: BTreeMap<NodeId, Vec<NodeId>>,
    /// Pending watchdog entries keyed by data packet uid.
    pub watchdog: BTreeMap<u64, Expectation>,
    /// Latest path seen for each relayed (source, destination) pair.
    pub relayed: BTreeMap<(NodeId, NodeId), Vec<NodeId>>,
    pub seen_rreq: BTreeSet<(NodeId, u64)>,
    pub seen_blacklist: BTreeSet<u64>,
    pub discoveries: BTreeMap<NodeId, Discovery>,
    pub buffer: BTreeMap<NodeId, VecDeque<crate::packet::Packet>>,
    pub holdoff_until_us: BTreeMap<NodeId, u64>,
    pub queries: BTreeMap<u64, TrustQuery>,
    pub drop_rng: ChaCha8Rng,
    pub overhear_rng: ChaCha8Rng,
    pub jitter_rng: ChaCha8Rng,
}

impl NodeState {
    pub fn new(id: NodeId, role: Role, seed: u64) -> Self {
        Self {
            id,
            role,
            records: BTreeMap::new(),
            evidence: BTreeSet::new(),
            blacklist: BTreeSet::new(),
            routes: BTreeMap::new(),
            watchdog: BTreeMap::new(),
            relayed: BTreeMap::new(),
            seen_rreq: BTreeSet::new(),
            seen_blacklist: BTreeSet::new(),
            discoveries: BTreeMap::new(),
            buffer: BTreeMap::new(),
            holdoff_until_us: BTreeMap::new(),
            queries: BTreeMap::new(),
            drop_rng: rng::stream(seed, id.0, Stream::Drop),
            overhear_rng: rng::stream(seed, id.0, Stream::Overhear),
            jitter_rng: rng::stream(seed, id.0, Stream::Jitter),
        }
    }

    pub fn record(&mut self, subject: NodeId) -> &mut TrustRecord {
        self.records.entry(subject).or_insert_with(|| TrustRecord::new(subject))
    }

    /// Smoothed trust in `subject`, if it rests on any evidence.
    pub fn observed_trust(&self, subject: NodeId) -> Option<f64> {
        self.evidence
            .contains(&subject)
            .then(|| self.records[&subject].smoothed_trust())
    }

    /// First hop and hop count toward `dst`.
    pub fn next_hop(&self, dst: NodeId) -> Option<(NodeId, usize)> {
        let path = self.routes.get(&dst)?;
        Some((path[1], path.len() - 1))
    }

    /// Drops every route through `node`. Returns the affected destinations.
    pub fn invalidate_routes_via(&mut self, node: NodeId) -> Vec<NodeId> {
        let broken: Vec<NodeId> = self
            .routes
            .iter()
            .filter(|(_, p)| p.contains(&node))
            .map(|(&d, _)| d)
            .collect();
        for d in &broken {
            self.routes.remove(d);
        }
        broken
    }

    pub fn buffered(&self) -> usize {
        self.buffer.values().map(VecDeque::len).sum()
    }
}
