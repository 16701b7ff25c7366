//! Counts fusion work for a controlled number of evaluators and recommenders.
//!
//! Each evaluator sits in its own isolated cluster together with one target
//! and `recommenders` neighbours that already hold evidence about the target.
//! A single trust tick then makes every evaluator query and fuse, and the
//! Dempster combinations are counted by the simulator itself.

use dstrust_core::NodeId;

use crate::config::{Scheme, SimConfig};
use crate::metrics::Counters;
use crate::sim::Simulator;
use crate::topology::Topology;
use crate::Result;

const CLUSTER_GAP_M: f64 = 10_000.0;
const CLUSTER_RADIUS_M: f64 = 50.0;

/// Runs one trust period and returns the resulting counters.
pub fn fusion_work(evaluators: usize, recommenders: usize) -> Result<Counters> {
    let per_cluster = recommenders + 2;
    let mut positions = Vec::with_capacity(evaluators * per_cluster);
    for c in 0..evaluators {
        let cx = c as f64 * CLUSTER_GAP_M;
        for k in 0..per_cluster {
            let angle = k as f64 / per_cluster as f64 * std::f64::consts::TAU;
            positions.push((cx + CLUSTER_RADIUS_M * angle.cos(), CLUSTER_RADIUS_M * angle.sin()));
        }
    }
    let n = positions.len();
    let cfg = SimConfig {
        grid_rows: 1,
        grid_cols: n.max(1),
        scheme: Scheme::DsTrust,
        sim_time_s: 21.0,
        default_flows: false,
        ..SimConfig::default()
    };
    let topology = Topology::from_positions(positions, cfg.range_m, n.max(1));
    let mut sim = Simulator::with_topology(&cfg, topology, 0)?;
    for c in 0..evaluators {
        let base = (c * per_cluster) as u32;
        let (evaluator, target) = (NodeId(base), NodeId(base + 1));
        sim.observe(evaluator, target, 20, 20)?;
        for r in 0..recommenders as u32 {
            sim.observe_history(NodeId(base + 2 + r), target, 20, 20)?;
        }
    }
    Ok(sim.run()?.report.counters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_combination_per_recommendation() {
        let c = fusion_work(3, 4).unwrap();
        assert_eq!(c.fusion_calls, 3);
        assert_eq!(c.fusion_ops, 12);
    }

    #[test]
    fn no_recommenders_means_no_combinations() {
        let c = fusion_work(2, 0).unwrap();
        assert_eq!(c.fusion_calls, 2);
        assert_eq!(c.fusion_ops, 0);
    }
}
