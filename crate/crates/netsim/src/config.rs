//! Simulation configuration, loaded from TOML.

use std::fmt;
use std::str::FromStr;

use dstrust_core::dst::CombinedScalar;
use serde::{Deserialize, Serialize};

use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Plain on-demand routing with no trust machinery.
    Baseline,
    /// Watchdog, recommendations, evidence fusion and network-wide blacklisting.
    DsTrust,
    /// Watchdog and local blacklisting only.
    DsTrustNoRecs,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Baseline, Scheme::DsTrust, Scheme::DsTrustNoRecs];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::DsTrust => "ds_trust",
            Scheme::DsTrustNoRecs => "ds_trust_no_recs",
        }
    }

    pub fn monitors(self) -> bool {
        self != Scheme::Baseline
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| SimError::invalid("scheme", format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack {
    #[default]
    None,
    Blackhole,
    Grayhole,
}

impl Attack {
    pub fn as_str(self) -> &'static str {
        match self {
            Attack::None => "none",
            Attack::Blackhole => "blackhole",
            Attack::Grayhole => "grayhole",
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleKind {
    Blackhole,
    Grayhole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerSpec {
    pub node: u32,
    pub role: RoleKind,
    #[serde(default = "one")]
    pub drop_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub src: u32,
    pub dst: u32,
    pub start_s: f64,
}

/// Axes of a parameter sweep. Exactly one of the two point lists is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub n_attackers: Vec<usize>,
    #[serde(default)]
    pub drop_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub spacing_m: f64,
    pub range_m: f64,
    pub data_rate_bps: f64,
    pub hop_latency_s: f64,
    /// Upper bound of the uniform pause before rebroadcasting a flood.
    pub broadcast_jitter_s: f64,
    pub packet_size_bytes: u32,
    pub packets_per_s: f64,
    pub sim_time_s: f64,
    /// Sources stop generating this long before the end so the network drains.
    pub drain_s: f64,
    pub gamma: f64,
    pub period_s: f64,
    pub alpha: f64,
    pub p_miss: f64,
    pub scheme: Scheme,
    pub combined_scalar: CombinedScalar,
    /// Trust in a recommender the requester has never observed.
    pub unknown_recommender_trust: f64,
    /// Age at which an unconfirmed hand-off counts as a drop at the next tick.
    pub watchdog_grace_s: f64,
    pub reply_window_s: f64,
    pub discovery_timeout_s: f64,
    pub discovery_retries: u32,
    /// After discovery gives up, new packets are dropped for this long.
    pub route_holdoff_s: f64,
    /// Random placement, used when `attackers` is empty.
    pub attack: Attack,
    pub n_attackers: usize,
    pub drop_prob: f64,
    pub attackers: Vec<AttackerSpec>,
    pub flows: Vec<FlowSpec>,
    /// With no explicit flows, run one per row from the leftmost to the
    /// rightmost column.
    pub default_flows: bool,
    pub master_seed: u64,
    pub runs: usize,
    pub trace: bool,
    pub sweep: Option<SweepAxes>,
}

fn one() -> f64 {
    1.0
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_rows: 10,
            grid_cols: 10,
            spacing_m: 150.0,
            range_m: 250.0,
            data_rate_bps: 16_000.0,
            hop_latency_s: 0.002,
            broadcast_jitter_s: 0.01,
            packet_size_bytes: 512,
            packets_per_s: 4.0,
            sim_time_s: 300.0,
            drain_s: 5.0,
            gamma: 0.5,
            period_s: 20.0,
            alpha: 0.5,
            p_miss: 0.0,
            scheme: Scheme::DsTrust,
            combined_scalar: CombinedScalar::Belief,
            unknown_recommender_trust: 1.0,
            watchdog_grace_s: 1.0,
            reply_window_s: 0.5,
            discovery_timeout_s: 1.0,
            discovery_retries: 2,
            route_holdoff_s: 5.0,
            attack: Attack::None,
            n_attackers: 0,
            drop_prob: 1.0,
            attackers: Vec::new(),
            flows: Vec::new(),
            default_flows: true,
            master_seed: 1,
            runs: 10,
            trace: false,
            sweep: None,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SimError::invalid(name, format!("{v} is outside [0, 1]")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::invalid(name, format!("{v} must be positive")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SimError::invalid(name, format!("{v} must be non-negative")))
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn n_nodes(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(SimError::invalid("grid", "rows and cols must be at least 1"));
        }
        positive("spacing_m", self.spacing_m)?;
        non_negative("range_m", self.range_m)?;
        positive("data_rate_bps", self.data_rate_bps)?;
        non_negative("hop_latency_s", self.hop_latency_s)?;
        non_negative("broadcast_jitter_s", self.broadcast_jitter_s)?;
        if self.packet_size_bytes == 0 {
            return Err(SimError::invalid("packet_size_bytes", "must be positive"));
        }
        positive("packets_per_s", self.packets_per_s)?;
        positive("sim_time_s", self.sim_time_s)?;
        non_negative("drain_s", self.drain_s)?;
        if self.drain_s >= self.sim_time_s {
            return Err(SimError::invalid("drain_s", "must be shorter than sim_time_s"));
        }
        unit("gamma", self.gamma)?;
        positive("period_s", self.period_s)?;
        unit("alpha", self.alpha)?;
        unit("p_miss", self.p_miss)?;
        unit("unknown_recommender_trust", self.unknown_recommender_trust)?;
        non_negative("watchdog_grace_s", self.watchdog_grace_s)?;
        if self.watchdog_grace_s >= self.period_s {
            return Err(SimError::invalid("watchdog_grace_s", "must be shorter than period_s"));
        }
        non_negative("reply_window_s", self.reply_window_s)?;
        if self.reply_window_s >= self.period_s {
            return Err(SimError::invalid("reply_window_s", "must be shorter than period_s"));
        }
        positive("discovery_timeout_s", self.discovery_timeout_s)?;
        non_negative("route_holdoff_s", self.route_holdoff_s)?;
        unit("drop_prob", self.drop_prob)?;
        if self.master_seed > i64::MAX as u64 {
            return Err(SimError::invalid("master_seed", "must fit in a signed 64-bit integer"));
        }
        let n = self.n_nodes() as u32;
        for f in &self.flows {
            if f.src >= n || f.dst >= n {
                return Err(SimError::invalid(
                    "flows",
                    format!("flow {}->{} names a missing node", f.src, f.dst),
                ));
            }
            if f.src == f.dst {
                return Err(SimError::invalid("flows", "source and destination must differ"));
            }
            non_negative("flows.start_s", f.start_s)?;
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.attackers {
            if a.node >= n {
                return Err(SimError::invalid(
                    "attackers",
                    format!("node {} does not exist", a.node),
                ));
            }
            if !seen.insert(a.node) {
                return Err(SimError::invalid("attackers", format!("node {} listed twice", a.node)));
            }
            unit("attackers.drop_prob", a.drop_prob)?;
        }
        if self.attackers.is_empty() && self.attack != Attack::None {
            let candidates = self.attacker_candidates().len();
            if self.n_attackers > candidates {
                return Err(SimError::invalid(
                    "n_attackers",
                    format!(
                        "{} requested but only {candidates} non-endpoint nodes",
                        self.n_attackers
                    ),
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if s.schemes.is_empty() {
                return Err(SimError::invalid("sweep.schemes", "must not be empty"));
            }
            if s.n_attackers.is_empty() == s.drop_probs.is_empty() {
                return Err(SimError::invalid(
                    "sweep",
                    "set exactly one of n_attackers or drop_probs",
                ));
            }
            for &p in &s.drop_probs {
                unit("sweep.drop_probs", p)?;
            }
        }
        Ok(())
    }

    /// Configured flows, or the default row flows staggered by half a second.
    pub fn resolved_flows(&self) -> Vec<FlowSpec> {
        if !self.flows.is_empty() || !self.default_flows || self.grid_cols < 2 {
            return self.flows.clone();
        }
        (0..self.grid_rows)
            .map(|r| FlowSpec {
                src: (r * self.grid_cols) as u32,
                dst: (r * self.grid_cols + self.grid_cols - 1) as u32,
                start_s: 1.0 + 0.5 * r as f64,
            })
            .collect()
    }

    /// Nodes eligible for random attacker placement: everything that is not a
    /// flow endpoint.
    pub fn attacker_candidates(&self) -> Vec<u32> {
        let endpoints: std::collections::BTreeSet<u32> =
            self.resolved_flows().iter().flat_map(|f| [f.src, f.dst]).collect();
        (0..self.n_nodes() as u32).filter(|n| !endpoints.contains(n)).collect()
    }

    /// Sets one field from a `key=value` style override. Dotted keys reach
    /// into tables (`sweep.drop_probs`). Values are parsed as TOML, falling
    /// back to a bare string.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: String| SimError::Override {
            key: key.to_string(),
            reason,
        };
        let parsed = parse_toml_value(value);
        let mut root = toml::Value::try_from(&*self).map_err(|e| bad(e.to_string()))?;
        let mut slot = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = slot
                .as_table_mut()
                .ok_or_else(|| bad(format!("`{part}` is not inside a table")))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), parsed.clone());
                break;
            }
            slot = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let updated: SimConfig = root.try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}

fn parse_toml_value(text: &str) -> toml::Value {
    format!("v = {text}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}
