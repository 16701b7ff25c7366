//! Static node placement and unit-disk connectivity.

use dstrust_core::NodeId;

use crate::{Result, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<(f64, f64)>,
    range: f64,
    neighbors: Vec<Vec<NodeId>>,
    cols: usize,
}

impl Topology {
    /// Places `rows * cols` nodes on a square lattice. Node `r * cols + c`
    /// sits at `(c * spacing, r * spacing)`.
    pub fn grid(rows: usize, cols: usize, spacing: f64, range: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SimError::invalid("grid", "rows and cols must be at least 1"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(SimError::invalid("spacing_m", "must be positive"));
        }
        if !(range.is_finite() && range >= 0.0) {
            return Err(SimError::invalid("range_m", "must be non-negative"));
        }
        let positions = (0..rows * cols)
            .map(|i| ((i % cols) as f64 * spacing, (i / cols) as f64 * spacing))
            .collect();
        Ok(Self::from_positions(positions, range, cols))
    }

    /// Arbitrary placement. `cols` only affects [`Topology::node_at`].
    pub fn from_positions(positions: Vec<(f64, f64)>, range: f64, cols: usize) -> Self {
        let n = positions.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (xi, yi) = positions[i];
                let (xj, yj) = positions[j];
                if (xi - xj).hypot(yi - yj) <= range {
                    neighbors[i].push(NodeId(j as u32));
                    neighbors[j].push(NodeId(i as u32));
                }
            }
        }
        for list in &mut neighbors {
            list.sort();
        }
        Self {
            positions,
            range,
            neighbors,
            cols,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn position(&self, node: NodeId) -> (f64, f64) {
        self.positions[node.0 as usize]
    }

    /// Neighbours in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.neighbors[node.0 as usize]
    }

    pub fn are_neighbors(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn node_at(&self, row: usize, col: usize) -> NodeId {
        NodeId((row * self.cols + col) as u32)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.len() as u32).map(NodeId)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_node_has_eight_neighbours() {
        let t = Topology::grid(10, 10, 150.0, 250.0).unwrap();
        let centre = t.node_at(5, 5);
        assert_eq!(t.neighbors(centre).len(), 8);
        assert!(!t.are_neighbors(centre, t.node_at(5, 7)));
        assert!(t.are_neighbors(centre, t.node_at(6, 6)));
        assert_eq!(t.neighbors(t.node_at(0, 0)).len(), 3);
    }

    #[test]
    fn two_nodes_in_range_share_one_edge() {
        let t = Topology::grid(1, 2, 150.0, 250.0).unwrap();
        assert_eq!(t.neighbors(NodeId(0)), &[NodeId(1)]);
        assert_eq!(t.neighbors(NodeId(1)), &[NodeId(0)]);
    }

    #[test]
    fn two_nodes_out_of_range_are_isolated() {
        let t = Topology::grid(1, 2, 300.0, 250.0).unwrap();
        assert!(t.neighbors(NodeId(0)).is_empty());
        assert!(t.neighbors(NodeId(1)).is_empty());
    }

    #[test]
    fn adjacency_is_symmetric_without_self_edges() {
        let t = Topology::grid(6, 7, 120.0, 250.0).unwrap();
        for a in t.nodes() {
            for &b in t.neighbors(a) {
                assert_ne!(a, b);
                assert!(t.are_neighbors(b, a));
            }
        }
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(Topology::grid(0, 3, 150.0, 250.0).is_err());
    }
}
