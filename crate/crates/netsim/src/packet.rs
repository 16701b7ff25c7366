use dstrust_core::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketKind {
    Data,
    Rreq,
    Rrep,
    Rerr,
    TrustReq,
    TrustRep,
    Blacklist,
}

impl PacketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Data => "DATA",
            PacketKind::Rreq => "RREQ",
            PacketKind::Rrep => "RREP",
            PacketKind::Rerr => "RERR",
            PacketKind::TrustReq => "TRUST_REQ",
            PacketKind::TrustRep => "TRUST_REP",
            PacketKind::Blacklist => "BLACKLIST",
        }
    }

    pub fn is_routing_control(self) -> bool {
        matches!(self, PacketKind::Rreq | PacketKind::Rrep | PacketKind::Rerr)
    }

    pub fn is_trust_control(self) -> bool {
        matches!(
            self,
            PacketKind::TrustReq | PacketKind::TrustRep | PacketKind::Blacklist
        )
    }

    /// Nominal on-air size of control packets, excluding any carried path.
    pub fn header_bytes(self) -> u32 {
        match self {
            PacketKind::Data => 0,
            PacketKind::Rreq => 24,
            PacketKind::Rrep => 20,
            PacketKind::Rerr => 12,
            PacketKind::TrustReq => 16,
            PacketKind::TrustRep => 20,
            PacketKind::Blacklist => 16,
        }
    }
}

/// What a packet carries beyond its addressing.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// Source-routed payload; `hop` indexes the current holder in `path`.
    Data {
        path: Vec<NodeId>,
        hop: usize,
    },
    /// Accumulated route from the originator to the latest rebroadcaster.
    Rreq {
        id: u64,
        path: Vec<NodeId>,
    },
    /// Full claimed route, travelling back along it; `hop` is the holder.
    Rrep {
        id: u64,
        path: Vec<NodeId>,
        hop: usize,
    },
    /// Travels back along `path` toward `path[0]`.
    Rerr {
        path: Vec<NodeId>,
        hop: usize,
        unreachable: NodeId,
        dropped: Option<u64>,
    },
    TrustReq {
        id: u64,
        target: NodeId,
    },
    TrustRep {
        id: u64,
        target: NodeId,
        trust: f64,
    },
    Blacklist {
        id: u64,
        target: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub uid: u64,
    pub kind: PacketKind,
    pub source: NodeId,
    pub destination: NodeId,
    pub previous_hop: NodeId,
    /// `None` for link-layer broadcasts.
    pub next_hop: Option<NodeId>,
    pub flow: Option<u32>,
    pub seq: u64,
    pub size: u32,
    pub body: Body,
}

impl Packet {
    pub fn is_broadcast(&self) -> bool {
        self.next_hop.is_none()
    }
}
