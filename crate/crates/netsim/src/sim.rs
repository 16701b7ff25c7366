//! The discrete-event loop.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use dstrust_core::dst::{self, FusionInput, Recommendation};
use dstrust_core::NodeId;
use rand::Rng;

use crate::config::{Attack, RoleKind, Scheme, SimConfig};
use crate::metrics::{compute_metrics, Counters, Detection, MetricsReport};
use crate::node::{Discovery, Expectation, NodeState, Role, TrustQuery};
use crate::packet::{Body, Packet, PacketKind};
use crate::rng::{self, Stream};
use crate::topology::Topology;
use crate::Result;

const BYTES_PER_PATH_ENTRY: u32 = 4;

fn micros(seconds: f64) -> u64 {
    (seconds * 1e6).round() as u64
}

/// One line of the optional debugging trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time_us: u64,
    pub node: NodeId,
    pub what: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:06} {} {}",
            self.time_us / 1_000_000,
            self.time_us % 1_000_000,
            self.node,
            self.what
        )
    }
}

#[derive(Debug)]
enum Event {
    Arrive { to: NodeId, packet: Box<Packet> },
    Generate { flow: usize, index: u64 },
    TrustTick,
    TrustDecide { node: NodeId, query: u64 },
    RouteSelect { node: NodeId, dst: NodeId, id: u64 },
    DiscoveryTimeout { node: NodeId, dst: NodeId, id: u64 },
    End,
}

#[derive(Debug)]
struct Queued {
    time: u64,
    seq: u64,
    event: Event,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub trace: Vec<TraceEvent>,
}

pub struct Simulator {
    cfg: SimConfig,
    topology: Topology,
    nodes: Vec<NodeState>,
    flows: Vec<(NodeId, NodeId, u64)>,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    now: u64,
    end: u64,
    traffic_end: u64,
    pending_delay: u64,
    next_uid: u64,
    next_id: u64,
    counters: Counters,
    first_carry: BTreeMap<NodeId, u64>,
    blacklisted_at: BTreeMap<NodeId, u64>,
    trace: Option<Vec<TraceEvent>>,
}

/// Runs one simulation to completion.
pub fn run_simulation(cfg: &SimConfig, seed: u64) -> Result<MetricsReport> {
    Ok(Simulator::new(cfg, seed)?.run()?.report)
}

/// Attacker roles for a run: the explicit list if given, otherwise
/// `n_attackers` nodes drawn uniformly from the non-endpoint nodes.
pub fn place_attackers(cfg: &SimConfig, seed: u64) -> BTreeMap<NodeId, Role> {
    let role_of = |kind: RoleKind, drop_prob: f64| match kind {
        RoleKind::Blackhole => Role::Blackhole,
        RoleKind::Grayhole => Role::Grayhole { drop_prob },
    };
    if !cfg.attackers.is_empty() {
        return cfg
            .attackers
            .iter()
            .map(|a| (NodeId(a.node), role_of(a.role, a.drop_prob)))
            .collect();
    }
    let kind = match cfg.attack {
        Attack::None => return BTreeMap::new(),
        Attack::Blackhole => RoleKind::Blackhole,
        Attack::Grayhole => RoleKind::Grayhole,
    };
    let candidates = cfg.attacker_candidates();
    let mut placement = rng::stream(seed, u32::MAX, Stream::Placement);
    rand::seq::index::sample(&mut placement, candidates.len(), cfg.n_attackers)
        .into_iter()
        .map(|i| (NodeId(candidates[i]), role_of(kind, cfg.drop_prob)))
        .collect()
}

impl Simulator {
    pub fn new(cfg: &SimConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let topology = Topology::grid(cfg.grid_rows, cfg.grid_cols, cfg.spacing_m, cfg.range_m)?;
        Self::with_topology(cfg, topology, seed)
    }

    /// Runs over an arbitrary topology. Flow and attacker node ids in `cfg`
    /// must exist in it.
    pub fn with_topology(cfg: &SimConfig, topology: Topology, seed: u64) -> Result<Self> {
        let roles = place_attackers(cfg, seed);
        let nodes = topology
            .nodes()
            .map(|id| NodeState::new(id, roles.get(&id).copied().unwrap_or(Role::Honest), seed))
            .collect();
        let mut sim = Self {
            cfg: cfg.clone(),
            topology,
            nodes,
            flows: Vec::new(),
            queue: BinaryHeap::new(),
            seq: 0,
            now: 0,
            end: micros(cfg.sim_time_s),
            traffic_end: micros(cfg.sim_time_s - cfg.drain_s),
            pending_delay: 0,
            next_uid: 0,
            next_id: 0,
            counters: Counters::default(),
            first_carry: BTreeMap::new(),
            blacklisted_at: BTreeMap::new(),
            trace: cfg.trace.then(Vec::new),
        };
        for f in cfg.resolved_flows() {
            if f.src as usize >= sim.nodes.len() || f.dst as usize >= sim.nodes.len() {
                return Err(crate::SimError::invalid("flows", "flow endpoint outside topology"));
            }
            sim.flows.push((NodeId(f.src), NodeId(f.dst), micros(f.start_s)));
        }
        sim.schedule_at(sim.end, Event::End);
        for (i, &(_, _, start)) in sim.flows.clone().iter().enumerate() {
            if start < sim.traffic_end {
                sim.schedule_at(start, Event::Generate { flow: i, index: 0 });
            }
        }
        let period = micros(cfg.period_s);
        if cfg.scheme.monitors() && period < sim.end {
            sim.schedule_at(period, Event::TrustTick);
        }
        Ok(sim)
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.0 as usize]
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Books watchdog outcomes directly into `observer`'s current period.
    pub fn observe(&mut self, observer: NodeId, subject: NodeId, sent: u64, overheard: u64) -> Result<()> {
        let rec = self.nodes[observer.0 as usize].record(subject);
        for i in 0..sent {
            rec.record_sent();
            if i < overheard {
                rec.record_overheard()?;
            }
        }
        Ok(())
    }

    /// Like [`Simulator::observe`], but closes the period at once so the
    /// record counts as past evidence and triggers no evaluation.
    pub fn observe_history(&mut self, observer: NodeId, subject: NodeId, sent: u64, overheard: u64) -> Result<()> {
        self.observe(observer, subject, sent, overheard)?;
        let alpha = self.cfg.alpha;
        let node = &mut self.nodes[observer.0 as usize];
        if node.record(subject).close_period(0.0, alpha)?.is_some() {
            node.evidence.insert(subject);
        }
        Ok(())
    }

    /// Watchdog view of `subject` from `observer` in the current period:
    /// hand-offs (including unconfirmed ones) and confirmed forwardings.
    pub fn tally(&self, observer: NodeId, subject: NodeId) -> (u64, u64) {
        let node = self.node(observer);
        let pending = node.watchdog.values().filter(|e| e.forwarder == subject).count() as u64;
        node.records
            .get(&subject)
            .map_or((pending, 0), |r| (r.packets_sent() + pending, r.packets_overheard()))
    }

    pub fn now_s(&self) -> f64 {
        self.now as f64 / 1e6
    }

    pub fn run(mut self) -> Result<RunOutput> {
        self.run_until(f64::INFINITY)?;
        Ok(self.finish())
    }

    /// Processes every event up to and including `until_s`, stopping early at
    /// the end of the simulation.
    pub fn run_until(&mut self, until_s: f64) -> Result<()> {
        let limit = if until_s.is_finite() { micros(until_s) } else { u64::MAX };
        while let Some(Reverse(head)) = self.queue.peek() {
            if head.time > limit || matches!(head.event, Event::End) {
                break;
            }
            let Reverse(q) = self.queue.pop().expect("peeked");
            self.now = q.time;
            match q.event {
                Event::End => unreachable!("stops before the end marker"),
                Event::Arrive { to, packet } => self.on_arrive(to, *packet)?,
                Event::Generate { flow, index } => self.on_generate(flow, index),
                Event::TrustTick => self.on_tick()?,
                Event::TrustDecide { node, query } => self.on_trust_decide(node, query)?,
                Event::RouteSelect { node, dst, id } => self.on_route_select(node, dst, id),
                Event::DiscoveryTimeout { node, dst, id } => self.on_discovery_timeout(node, dst, id),
            }
        }
        Ok(())
    }

    fn finish(mut self) -> RunOutput {
        let airborne = self
            .queue
            .iter()
            .filter(|Reverse(q)| matches!(&q.event, Event::Arrive { packet, .. } if packet.kind == PacketKind::Data))
            .count() as u64;
        let buffered: u64 = self.nodes.iter().map(|n| n.buffered() as u64).sum();
        self.counters.in_flight = airborne + buffered;

        let honest: Vec<&NodeState> = self.nodes.iter().filter(|n| n.role.is_honest()).collect();
        let mut counts: BTreeMap<NodeId, u32> = BTreeMap::new();
        for n in &honest {
            for &b in &n.blacklist {
                *counts.entry(b).or_default() += 1;
            }
        }
        let false_positives = counts
            .keys()
            .filter(|id| self.nodes[id.0 as usize].role.is_honest())
            .count();
        let mut report = compute_metrics(
            &self.counters,
            self.cfg.packet_size_bytes,
            self.cfg.sim_time_s,
            false_positives,
            self.nodes.len(),
        );
        let seconds = |us: u64| us as f64 / 1e6;
        for n in self.nodes.iter().filter(|n| !n.role.is_honest()) {
            let blacklisted = self.blacklisted_at.get(&n.id).copied();
            if blacklisted.is_some() {
                report.detected.insert(n.id);
            }
            report.detections.push(Detection {
                attacker: n.id,
                first_carry_s: self.first_carry.get(&n.id).copied().map(seconds),
                blacklisted_s: blacklisted.map(seconds),
            });
        }
        report.blacklist_counts = counts.into_iter().collect();
        RunOutput {
            report,
            trace: self.trace.unwrap_or_default(),
        }
    }

    fn schedule_at(&mut self, time: u64, event: Event) {
        self.seq += 1;
        self.queue.push(Reverse(Queued {
            time,
            seq: self.seq,
            event,
        }));
    }

    fn schedule_in(&mut self, delay: u64, event: Event) {
        self.schedule_at(self.now + delay, event);
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn log(&mut self, node: NodeId, what: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            t.push(TraceEvent {
                time_us: self.now,
                node,
                what: what(),
            });
        }
    }

    fn monitors(&self) -> bool {
        self.cfg.scheme.monitors()
    }

    fn st(&mut self, id: NodeId) -> &mut NodeState {
        &mut self.nodes[id.0 as usize]
    }

    fn tx_delay(&self, size: u32) -> u64 {
        micros(self.cfg.hop_latency_s + f64::from(size) * 8.0 / self.cfg.data_rate_bps)
    }

    fn control_packet(
        &mut self,
        kind: PacketKind,
        from: NodeId,
        to: NodeId,
        next_hop: Option<NodeId>,
        path_len: usize,
        body: Body,
    ) -> Packet {
        self.next_uid += 1;
        Packet {
            uid: self.next_uid,
            kind,
            source: from,
            destination: to,
            previous_hop: from,
            next_hop,
            flow: None,
            seq: 0,
            size: kind.header_bytes() + BYTES_PER_PATH_ENTRY * path_len as u32,
            body,
        }
    }

    fn transmit(&mut self, from: NodeId, mut packet: Packet) {
        packet.previous_hop = from;
        if packet.kind.is_routing_control() {
            self.counters.routing_control += 1;
        } else if packet.kind.is_trust_control() {
            self.counters.trust_control += 1;
        }
        self.log(from, || format!("tx {}", packet.kind.as_str()));
        if let Body::Data { path, hop } = &packet.body {
            if *hop >= 2 {
                self.overhear(path[hop - 2], from, packet.uid);
            }
        }
        let delay = self.tx_delay(packet.size) + self.pending_delay;
        match packet.next_hop {
            None => {
                for i in 0..self.topology.neighbors(from).len() {
                    let to = self.topology.neighbors(from)[i];
                    self.schedule_in(
                        delay,
                        Event::Arrive {
                            to,
                            packet: Box::new(packet.clone()),
                        },
                    );
                }
            }
            Some(to) if self.topology.are_neighbors(from, to) => {
                self.schedule_in(
                    delay,
                    Event::Arrive {
                        to,
                        packet: Box::new(packet),
                    },
                );
            }
            Some(_) => {
                if packet.kind == PacketKind::Data {
                    self.counters.dropped_route_failure += 1;
                }
            }
        }
    }

    /// Rebroadcast after a random pause, so that repeated floods explore
    /// different paths.
    fn transmit_jittered(&mut self, from: NodeId, packet: Packet) {
        let max = micros(self.cfg.broadcast_jitter_s);
        let jitter = if max == 0 {
            0
        } else {
            self.st(from).jitter_rng.random_range(0..=max)
        };
        self.pending_delay = jitter;
        self.transmit(from, packet);
        self.pending_delay = 0;
    }

    /// `watcher` handed packet `uid` to `forwarder` and now may hear it go out.
    fn overhear(&mut self, watcher: NodeId, forwarder: NodeId, uid: u64) {
        let p_miss = self.cfg.p_miss;
        let w = self.st(watcher);
        if w.watchdog.get(&uid).map(|e| e.forwarder) != Some(forwarder) {
            return;
        }
        if p_miss > 0.0 && w.overhear_rng.random::<f64>() < p_miss {
            return;
        }
        w.watchdog.remove(&uid);
        let rec = w.record(forwarder);
        rec.record_sent();
        rec.record_overheard().expect("one overhear per recorded hand-off");
    }

    fn on_arrive(&mut self, to: NodeId, packet: Packet) -> Result<()> {
        let from = packet.previous_hop;
        if packet.kind != PacketKind::Data && self.monitors() && self.node(to).blacklist.contains(&from) {
            self.log(to, || format!("ignore {} from {from}", packet.kind.as_str()));
            return Ok(());
        }
        match packet.kind {
            PacketKind::Data => self.forward_data(to, packet),
            PacketKind::Rreq => self.on_rreq(to, packet),
            PacketKind::Rrep => self.on_rrep(to, packet),
            PacketKind::Rerr => self.on_rerr(to, packet),
            PacketKind::TrustReq => self.on_trust_req(to, packet),
            PacketKind::TrustRep => self.on_trust_rep(to, packet),
            PacketKind::Blacklist => self.on_blacklist(to, packet),
        }
        Ok(())
    }

    fn on_generate(&mut self, flow: usize, index: u64) {
        let (src, dst, start) = self.flows[flow];
        let interval = micros(1.0 / self.cfg.packets_per_s);
        let next = start + (index + 1) * interval;
        if next < self.traffic_end {
            self.schedule_at(next, Event::Generate { flow, index: index + 1 });
        }
        self.counters.generated += 1;
        self.next_uid += 1;
        let packet = Packet {
            uid: self.next_uid,
            kind: PacketKind::Data,
            source: src,
            destination: dst,
            previous_hop: src,
            next_hop: None,
            flow: Some(flow as u32),
            seq: index,
            size: self.cfg.packet_size_bytes,
            body: Body::Data {
                path: Vec::new(),
                hop: 0,
            },
        };
        if self.node(src).routes.contains_key(&dst) {
            self.send_from_source(src, packet);
        } else if self.node(src).holdoff_until_us.get(&dst).is_some_and(|&t| t > self.now) {
            self.counters.dropped_route_failure += 1;
        } else {
            self.st(src).buffer.entry(dst).or_default().push_back(packet);
            if !self.node(src).discoveries.contains_key(&dst) {
                self.start_discovery(src, dst, 0);
            }
        }
    }

    fn send_from_source(&mut self, src: NodeId, mut packet: Packet) {
        let path = self.node(src).routes[&packet.destination].clone();
        packet.body = Body::Data { path, hop: 0 };
        self.forward_data(src, packet);
    }

    fn forward_data(&mut self, x: NodeId, mut packet: Packet) {
        let Body::Data { path, hop } = &packet.body else {
            unreachable!("data packet without data body")
        };
        let (path, i) = (path.clone(), *hop);
        debug_assert_eq!(path[i], x);
        if i + 1 == path.len() {
            self.counters.delivered += 1;
            self.log(x, || format!("deliver {}", packet.uid));
            return;
        }
        if i > 0 {
            match self.node(x).role {
                Role::Honest => {}
                Role::Blackhole => {
                    self.first_carry.entry(x).or_insert(self.now);
                    self.counters.dropped_attacker += 1;
                    self.log(x, || format!("drop {}", packet.uid));
                    return;
                }
                Role::Grayhole { drop_prob } => {
                    self.first_carry.entry(x).or_insert(self.now);
                    if self.st(x).drop_rng.random::<f64>() < drop_prob {
                        self.counters.dropped_attacker += 1;
                        self.log(x, || format!("drop {}", packet.uid));
                        return;
                    }
                }
            }
        }
        let next = path[i + 1];
        let blocked = self.monitors() && self.node(x).blacklist.contains(&next);
        if blocked || !self.topology.are_neighbors(x, next) {
            self.counters.dropped_route_failure += 1;
            self.log(x, || format!("no-route {}", packet.uid));
            if i == 0 {
                self.st(x).routes.remove(&packet.destination);
            } else {
                self.send_rerr(x, &path, i, next, Some(packet.uid));
            }
            return;
        }
        let dst = packet.destination;
        let (monitors, honest) = (self.monitors(), self.node(x).role.is_honest());
        let now = self.now;
        let node = self.st(x);
        if i > 0 {
            node.relayed.insert((packet.source, dst), path.clone());
        }
        if monitors && honest && next != dst {
            node.watchdog.insert(
                packet.uid,
                Expectation {
                    forwarder: next,
                    since_us: now,
                },
            );
        }
        packet.body = Body::Data { path, hop: i + 1 };
        packet.next_hop = Some(next);
        self.transmit(x, packet);
    }

    fn send_rerr(&mut self, x: NodeId, path: &[NodeId], i: usize, unreachable: NodeId, dropped: Option<u64>) {
        if i == 0 {
            return;
        }
        let body = Body::Rerr {
            path: path.to_vec(),
            hop: i - 1,
            unreachable,
            dropped,
        };
        let p = self.control_packet(PacketKind::Rerr, x, path[0], Some(path[i - 1]), 0, body);
        self.transmit(x, p);
    }

    fn on_rerr(&mut self, y: NodeId, mut packet: Packet) {
        let Body::Rerr {
            path,
            hop,
            unreachable,
            dropped,
        } = &mut packet.body
        else {
            return;
        };
        let i = *hop;
        if let Some(uid) = dropped {
            let node = self.st(y);
            if node.watchdog.get(uid).map(|e| e.forwarder) == Some(path[i + 1]) {
                node.watchdog.remove(uid);
            }
        }
        if i == 0 {
            let dst = *path.last().expect("non-empty path");
            let gone = *unreachable;
            let node = self.st(y);
            if node.routes.get(&dst).is_some_and(|r| r.contains(&gone)) {
                node.routes.remove(&dst);
            }
            self.log(y, || format!("route-error {dst}"));
            return;
        }
        let next = path[i - 1];
        *hop = i - 1;
        packet.next_hop = Some(next);
        self.transmit(y, packet);
    }

    fn start_discovery(&mut self, src: NodeId, dst: NodeId, attempt: u32) {
        let id = self.fresh_id();
        let node = self.st(src);
        node.discoveries.insert(
            dst,
            Discovery {
                id,
                attempt,
                candidates: Vec::new(),
            },
        );
        node.seen_rreq.insert((src, id));
        let p = self.control_packet(PacketKind::Rreq, src, dst, None, 1, Body::Rreq { id, path: vec![src] });
        self.transmit(src, p);
        let timeout = micros(self.cfg.discovery_timeout_s);
        self.schedule_in(timeout, Event::DiscoveryTimeout { node: src, dst, id });
    }

    fn on_rreq(&mut self, x: NodeId, packet: Packet) {
        let Body::Rreq { id, path } = &packet.body else {
            return;
        };
        let (src, dst) = (packet.source, packet.destination);
        if x == src || path.contains(&x) {
            return;
        }
        if x == dst {
            // Every copy arrives over a distinct path; the source keeps the first.
            let mut full = path.clone();
            full.push(x);
            let at = full.len() - 1;
            self.send_rrep(x, *id, full, at);
            return;
        }
        if !self.st(x).seen_rreq.insert((src, *id)) {
            return;
        }
        if self.node(x).role == Role::Blackhole {
            let mut fake = path.clone();
            fake.push(x);
            fake.push(dst);
            let at = fake.len() - 2;
            self.send_rrep(x, *id, fake, at);
            return;
        }
        let mut grown = path.clone();
        grown.push(x);
        let len = grown.len();
        let mut p = self.control_packet(
            PacketKind::Rreq,
            src,
            dst,
            None,
            len,
            Body::Rreq { id: *id, path: grown },
        );
        p.source = src;
        self.transmit_jittered(x, p);
    }

    fn send_rrep(&mut self, x: NodeId, id: u64, path: Vec<NodeId>, at: usize) {
        let next = path[at - 1];
        let len = path.len();
        let to = path[0];
        let p = self.control_packet(
            PacketKind::Rrep,
            x,
            to,
            Some(next),
            len,
            Body::Rrep { id, path, hop: at - 1 },
        );
        self.transmit(x, p);
    }

    fn on_rrep(&mut self, y: NodeId, mut packet: Packet) {
        let Body::Rrep { id, path, hop } = &mut packet.body else {
            return;
        };
        if *hop == 0 {
            let (id, path) = (*id, path.clone());
            self.on_route_reply(y, id, path);
            return;
        }
        let next = path[*hop - 1];
        *hop -= 1;
        packet.next_hop = Some(next);
        self.transmit(y, packet);
    }

    fn on_route_reply(&mut self, src: NodeId, id: u64, path: Vec<NodeId>) {
        let dst = *path.last().expect("non-empty path");
        let monitors = self.monitors();
        let node = self.st(src);
        if monitors && path.iter().any(|n| node.blacklist.contains(n)) {
            return;
        }
        let Some(d) = node.discoveries.get_mut(&dst).filter(|d| d.id == id) else {
            return;
        };
        d.candidates.push(path);
        if d.candidates.len() == 1 {
            self.schedule_in(0, Event::RouteSelect { node: src, dst, id });
        }
    }

    fn on_route_select(&mut self, src: NodeId, dst: NodeId, id: u64) {
        let node = self.st(src);
        if node.discoveries.get(&dst).map(|d| d.id) != Some(id) {
            return;
        }
        let d = node.discoveries.remove(&dst).expect("checked above");
        let best = d
            .candidates
            .into_iter()
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
            .expect("selection follows a reply");
        node.routes.insert(dst, best);
        node.holdoff_until_us.remove(&dst);
        let waiting = node.buffer.remove(&dst).unwrap_or_default();
        self.log(src, || format!("route {dst}"));
        for p in waiting {
            self.send_from_source(src, p);
        }
    }

    fn on_discovery_timeout(&mut self, src: NodeId, dst: NodeId, id: u64) {
        let Some(d) = self.node(src).discoveries.get(&dst).filter(|d| d.id == id) else {
            return;
        };
        if !d.candidates.is_empty() {
            return;
        }
        let attempt = d.attempt + 1;
        if attempt <= self.cfg.discovery_retries {
            self.start_discovery(src, dst, attempt);
            return;
        }
        let holdoff = self.now + micros(self.cfg.route_holdoff_s);
        let node = self.st(src);
        node.discoveries.remove(&dst);
        let dropped = node.buffer.remove(&dst).map_or(0, |b| b.len() as u64);
        node.holdoff_until_us.insert(dst, holdoff);
        self.counters.dropped_route_failure += dropped;
        self.log(src, || format!("discovery-failed {dst}"));
    }

    fn on_tick(&mut self) -> Result<()> {
        let period = micros(self.cfg.period_s);
        if self.now + period < self.end {
            self.schedule_in(period, Event::TrustTick);
        }
        for i in 0..self.nodes.len() {
            if self.nodes[i].role.is_honest() {
                self.tick_node(NodeId(i as u32))?;
            }
        }
        Ok(())
    }

    fn tick_node(&mut self, x: NodeId) -> Result<()> {
        let now = self.now;
        let grace = micros(self.cfg.watchdog_grace_s);
        let alpha = self.cfg.alpha;
        let node = self.st(x);
        let expired: Vec<u64> = node
            .watchdog
            .iter()
            .filter(|(_, e)| now - e.since_us >= grace)
            .map(|(&uid, _)| uid)
            .collect();
        for uid in expired {
            let e = node.watchdog.remove(&uid).expect("listed above");
            node.record(e.forwarder).record_sent();
        }
        let mut fresh = Vec::new();
        for (&subject, rec) in node.records.iter_mut() {
            if rec.close_period(now as f64 / 1e6, alpha)?.is_some() {
                fresh.push(subject);
            }
        }
        node.evidence.extend(fresh.iter().copied());
        for target in fresh {
            if self.node(x).blacklist.contains(&target) {
                continue;
            }
            match self.cfg.scheme {
                Scheme::DsTrust => {
                    let id = self.fresh_id();
                    self.st(x).queries.insert(
                        id,
                        TrustQuery {
                            target,
                            replies: Vec::new(),
                        },
                    );
                    let p =
                        self.control_packet(PacketKind::TrustReq, x, target, None, 0, Body::TrustReq { id, target });
                    self.transmit(x, p);
                    let window = micros(self.cfg.reply_window_s);
                    self.schedule_in(window, Event::TrustDecide { node: x, query: id });
                }
                Scheme::DsTrustNoRecs => {
                    let trust = self.fuse(x, target, &[])?;
                    self.decide(x, target, trust);
                }
                Scheme::Baseline => {}
            }
        }
        Ok(())
    }

    fn on_trust_req(&mut self, y: NodeId, packet: Packet) {
        let Body::TrustReq { id, target } = packet.body else {
            return;
        };
        if !self.monitors() || !self.node(y).role.is_honest() || y == target {
            return;
        }
        let Some(trust) = self.node(y).observed_trust(target) else {
            return;
        };
        let requester = packet.source;
        let body = Body::TrustRep { id, target, trust };
        let p = self.control_packet(PacketKind::TrustRep, y, requester, Some(requester), 0, body);
        self.transmit(y, p);
    }

    fn on_trust_rep(&mut self, r: NodeId, packet: Packet) {
        let Body::TrustRep { id, target, trust } = packet.body else {
            return;
        };
        if let Some(q) = self.st(r).queries.get_mut(&id) {
            if q.target == target {
                q.replies.push((packet.source, trust));
            }
        }
    }

    fn on_trust_decide(&mut self, r: NodeId, query: u64) -> Result<()> {
        let Some(mut q) = self.st(r).queries.remove(&query) else {
            return Ok(());
        };
        if self.node(r).blacklist.contains(&q.target) {
            return Ok(());
        }
        q.replies.sort_by_key(|&(from, _)| from);
        let blacklist = &self.node(r).blacklist;
        q.replies.retain(|(from, _)| !blacklist.contains(from));
        let trust = self.fuse(r, q.target, &q.replies)?;
        self.decide(r, q.target, trust);
        Ok(())
    }

    /// Fuses `evaluator`'s direct trust in `target` with the received reports.
    fn fuse(&mut self, evaluator: NodeId, target: NodeId, reports: &[(NodeId, f64)]) -> Result<f64> {
        let node = self.node(evaluator);
        let direct = node.records[&target].smoothed_trust();
        let mut input = FusionInput::new(direct, self.cfg.gamma);
        input.scalar = self.cfg.combined_scalar;
        for &(from, reported) in reports {
            let in_recommender = node.observed_trust(from).unwrap_or(self.cfg.unknown_recommender_trust);
            input
                .recommendations
                .push(Recommendation::weighted(from, in_recommender, reported)?);
        }
        let fused = dst::fuse(&input)?;
        self.counters.fusion_calls += 1;
        self.counters.fusion_ops += fused.combinations as u64;
        self.log(evaluator, || format!("fuse {target} {:.6}", fused.trust));
        Ok(fused.trust)
    }

    fn decide(&mut self, x: NodeId, target: NodeId, trust: f64) {
        if trust >= self.cfg.gamma || self.node(x).blacklist.contains(&target) {
            return;
        }
        self.add_to_blacklist(x, target);
        let affected: Vec<Vec<NodeId>> = self
            .node(x)
            .relayed
            .values()
            .filter(|p| p.windows(2).any(|w| w == [x, target]))
            .cloned()
            .collect();
        self.st(x)
            .relayed
            .retain(|_, p| !p.windows(2).any(|w| w == [x, target]));
        for path in affected {
            let i = path.iter().position(|&n| n == x).expect("filtered on x");
            self.send_rerr(x, &path, i, target, None);
        }
        if self.cfg.scheme == Scheme::DsTrust {
            let id = self.fresh_id();
            self.st(x).seen_blacklist.insert(id);
            let p = self.control_packet(
                PacketKind::Blacklist,
                x,
                target,
                None,
                0,
                Body::Blacklist { id, target },
            );
            self.transmit(x, p);
        }
    }

    fn add_to_blacklist(&mut self, x: NodeId, target: NodeId) {
        let now = self.now;
        self.blacklisted_at.entry(target).or_insert(now);
        let node = self.st(x);
        node.blacklist.insert(target);
        node.invalidate_routes_via(target);
        node.watchdog.retain(|_, e| e.forwarder != target);
        self.log(x, || format!("blacklist {target}"));
    }

    fn on_blacklist(&mut self, y: NodeId, packet: Packet) {
        let Body::Blacklist { id, target } = packet.body else {
            return;
        };
        if !self.st(y).seen_blacklist.insert(id) {
            return;
        }
        let role = self.node(y).role;
        if role == Role::Blackhole || (!role.is_honest() && y == target) {
            return;
        }
        if role.is_honest() && y != target && self.monitors() {
            self.add_to_blacklist(y, target);
        }
        let mut p = packet;
        p.next_hop = None;
        self.transmit_jittered(y, p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(scheme: Scheme) -> Simulator {
        let cfg = SimConfig {
            grid_rows: 1,
            grid_cols: 3,
            scheme,
            default_flows: false,
            sim_time_s: 10.0,
            drain_s: 0.0,
            ..SimConfig::default()
        };
        Simulator::new(&cfg, 1).unwrap()
    }

    #[test]
    fn decide_blacklists_strictly_below_gamma() {
        let mut sim = line(Scheme::DsTrust);
        sim.decide(NodeId(0), NodeId(1), 0.5);
        assert!(sim.node(NodeId(0)).blacklist.is_empty());
        sim.decide(NodeId(0), NodeId(1), 0.49);
        assert!(sim.node(NodeId(0)).blacklist.contains(&NodeId(1)));
        assert_eq!(sim.counters().trust_control, 1);
    }

    #[test]
    fn local_scheme_does_not_flood() {
        let mut sim = line(Scheme::DsTrustNoRecs);
        sim.decide(NodeId(0), NodeId(1), 0.1);
        assert!(sim.node(NodeId(0)).blacklist.contains(&NodeId(1)));
        assert_eq!(sim.counters().trust_control, 0);
    }

    #[test]
    fn flood_reaches_every_honest_node_once() {
        let mut sim = line(Scheme::DsTrust);
        sim.decide(NodeId(0), NodeId(2), 0.0);
        sim.run_until(1.0).unwrap();
        assert!(sim.node(NodeId(1)).blacklist.contains(&NodeId(2)));
        // The origin and both honest receivers transmit once each.
        assert_eq!(sim.counters().trust_control, 3);
    }

    #[test]
    fn blacklisting_drops_routes_and_expectations() {
        let mut sim = line(Scheme::DsTrust);
        sim.st(NodeId(0))
            .routes
            .insert(NodeId(2), vec![NodeId(0), NodeId(1), NodeId(2)]);
        sim.st(NodeId(0)).watchdog.insert(
            9,
            Expectation {
                forwarder: NodeId(1),
                since_us: 0,
            },
        );
        sim.decide(NodeId(0), NodeId(1), 0.0);
        assert!(sim.node(NodeId(0)).routes.is_empty());
        assert!(sim.node(NodeId(0)).watchdog.is_empty());
    }

    #[test]
    fn queue_orders_by_time_then_insertion() {
        let mut sim = line(Scheme::Baseline);
        sim.queue.clear();
        sim.schedule_at(5, Event::TrustTick);
        sim.schedule_at(3, Event::End);
        sim.schedule_at(5, Event::End);
        let order: Vec<(u64, u64)> = std::iter::from_fn(|| sim.queue.pop().map(|Reverse(q)| (q.time, q.seq))).collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(order[0].0, 3);
    }
}
