//! The MRF energy model: graph, labels, unary costs, weighted pairwise prior.
//!
//! The energy of a labeling `x` is
//!
//! ```text
//! E(x) = sum_i  U_i(x_i)  +  sum_(i,j)  w_ij * f(x_i - x_j)
//! ```
//!
//! with `f = g` (the true, non-convex prior) or `f = h` (its convex
//! surrogate) depending on the evaluation mode. Everything here is immutable
//! after construction and evaluation is pure.

use crate::error::{Error, Result};
use crate::priors::Prior;

/// Which prior table an evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    /// The true truncated-convex prior g.
    G,
    /// The convex surrogate h.
    H,
}

/// An ordered label set {0, .., count-1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelSpace {
    count: usize,
}

impl LabelSpace {
    pub fn new(count: usize) -> Result<LabelSpace> {
        if count < 2 {
            return Err(Error::InvalidModel("label count must be >= 2".into()));
        }
        Ok(LabelSpace { count })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn max_label(&self) -> usize {
        self.count - 1
    }
}

/// Optional grid metadata for models built on image rasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridInfo {
    pub width: usize,
    pub height: usize,
}

/// Undirected graph over node indices. Edges are kept in canonical order:
/// lexicographic on (min(i,j), max(i,j)).
#[derive(Debug, Clone)]
pub struct GraphTopology {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    grid: Option<GridInfo>,
}

impl GraphTopology {
    pub fn new(
        node_count: usize,
        mut edges: Vec<(usize, usize)>,
        grid: Option<GridInfo>,
    ) -> Result<GraphTopology> {
        if node_count == 0 {
            return Err(Error::InvalidModel("graph needs at least one node".into()));
        }
        if let Some(g) = grid {
            if g.width * g.height != node_count {
                return Err(Error::DimensionMismatch(format!(
                    "grid {}x{} does not cover {} nodes",
                    g.width, g.height, node_count
                )));
            }
        }
        for &(i, j) in &edges {
            if i == j {
                return Err(Error::InvalidModel(format!("self-loop at node {i}")));
            }
            if i >= node_count || j >= node_count {
                return Err(Error::InvalidModel(format!(
                    "edge ({i}, {j}) references a node >= {node_count}"
                )));
            }
        }
        edges.sort_by_key(|&(i, j)| (i.min(j), i.max(j)));
        for w in edges.windows(2) {
            let a = (w[0].0.min(w[0].1), w[0].0.max(w[0].1));
            let b = (w[1].0.min(w[1].1), w[1].0.max(w[1].1));
            if a == b {
                return Err(Error::InvalidModel(format!(
                    "duplicate edge between {} and {}",
                    a.0, a.1
                )));
            }
        }
        Ok(GraphTopology { node_count, edges, grid })
    }

    /// 4-connected grid with edges in canonical order.
    pub fn grid4(width: usize, height: usize) -> Result<GraphTopology> {
        let mut edges = Vec::with_capacity(2 * width * height);
        for r in 0..height {
            for c in 0..width {
                let i = r * width + c;
                if c + 1 < width {
                    edges.push((i, i + 1));
                }
                if r + 1 < height {
                    edges.push((i, i + width));
                }
            }
        }
        GraphTopology::new(width * height, edges, Some(GridInfo { width, height }))
    }

    /// Simple path 0-1-2-...-(n-1).
    pub fn chain(node_count: usize) -> Result<GraphTopology> {
        let edges = (0..node_count.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        GraphTopology::new(node_count, edges, None)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn grid(&self) -> Option<GridInfo> {
        self.grid
    }
}

/// Dense per-node, per-label costs.
#[derive(Debug, Clone)]
pub struct UnaryTable {
    costs: Vec<f64>,
    node_count: usize,
    label_count: usize,
}

impl UnaryTable {
    /// `costs` is node-major: entry for (node i, label l) at `i * labels + l`.
    pub fn new(costs: Vec<f64>, node_count: usize, label_count: usize) -> Result<UnaryTable> {
        if costs.len() != node_count * label_count {
            return Err(Error::DimensionMismatch(format!(
                "unary table has {} entries, expected {} x {}",
                costs.len(),
                node_count,
                label_count
            )));
        }
        if costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("unary costs must be finite".into()));
        }
        Ok(UnaryTable { costs, node_count, label_count })
    }

    pub fn zeros(node_count: usize, label_count: usize) -> UnaryTable {
        UnaryTable {
            costs: vec![0.0; node_count * label_count],
            node_count,
            label_count,
        }
    }

    #[inline]
    pub fn cost(&self, node: usize, label: usize) -> f64 {
        debug_assert!(node < self.node_count && label < self.label_count);
        self.costs[node * self.label_count + label]
    }

    pub fn set(&mut self, node: usize, label: usize, cost: f64) {
        self.costs[node * self.label_count + label] = cost;
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.costs[node * self.label_count..(node + 1) * self.label_count]
    }
}

/// A full assignment of labels to nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling(Vec<usize>);

impl Labeling {
    pub fn new(labels: Vec<usize>) -> Labeling {
        Labeling(labels)
    }

    pub fn constant(node_count: usize, label: usize) -> Labeling {
        Labeling(vec![label; node_count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, node: usize) -> usize {
        self.0[node]
    }

    pub fn set(&mut self, node: usize, label: usize) {
        self.0[node] = label;
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Fraction of nodes whose label differs from `other`.
    pub fn changed_fraction(&self, other: &Labeling) -> f64 {
        assert_eq!(self.len(), other.len());
        if self.is_empty() {
            return 0.0;
        }
        let changed = self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count();
        changed as f64 / self.len() as f64
    }
}

/// The complete model: topology, label space, unary costs, prior, and
/// per-edge nonnegative weights aligned with `topology.edges()`.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    topology: GraphTopology,
    labels: LabelSpace,
    unary: UnaryTable,
    prior: Prior,
    edge_weights: Vec<f64>,
}

impl EnergyModel {
    pub fn new(
        topology: GraphTopology,
        labels: LabelSpace,
        unary: UnaryTable,
        prior: Prior,
        edge_weights: Vec<f64>,
    ) -> Result<EnergyModel> {
        if unary.label_count() != labels.count() {
            return Err(Error::DimensionMismatch("unary table label count != label space".into()));
        }
        if unary.node_count != topology.node_count() {
            return Err(Error::DimensionMismatch("unary table node count != topology".into()));
        }
        if prior.label_count() != labels.count() {
            return Err(Error::DimensionMismatch("prior table span != label space".into()));
        }
        if edge_weights.len() != topology.edge_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} edge weights for {} edges",
                edge_weights.len(),
                topology.edge_count()
            )));
        }
        if edge_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidModel("edge weights must be finite and >= 0".into()));
        }
        Ok(EnergyModel { topology, labels, unary, prior, edge_weights })
    }

    pub fn topology(&self) -> &GraphTopology {
        &self.topology
    }

    pub fn labels(&self) -> LabelSpace {
        self.labels
    }

    pub fn label_count(&self) -> usize {
        self.labels.count()
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn unary(&self) -> &UnaryTable {
        &self.unary
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    fn check_labeling(&self, x: &Labeling) -> Result<()> {
        if x.len() != self.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "labeling has {} entries for {} nodes",
                x.len(),
                self.node_count()
            )));
        }
        if let Some(&bad) = x.as_slice().iter().find(|&&l| l >= self.labels.count()) {
            return Err(Error::ContractViolation(format!(
                "label {bad} out of range 0..{}",
                self.labels.count()
            )));
        }
        Ok(())
    }

    /// Total energy of `x` under the chosen prior table.
    pub fn energy(&self, x: &Labeling, mode: PriorMode) -> Result<f64> {
        self.check_labeling(x)?;
        let mut total = 0.0;
        for i in 0..self.node_count() {
            total += self.unary.cost(i, x.get(i));
        }
        for (e, &(i, j)) in self.topology.edges().iter().enumerate() {
            let d = x.get(i) as isize - x.get(j) as isize;
            total += self.edge_weights[e] * self.prior.value(mode, d);
        }
        Ok(total)
    }

    /// Hybrid energy: h on edges whose endpoints are both in `active`,
    /// g everywhere else. Unary terms are unchanged.
    pub fn hybrid_energy(&self, x: &Labeling, active: &[bool]) -> Result<f64> {
        self.check_labeling(x)?;
        if active.len() != self.node_count() {
            return Err(Error::DimensionMismatch("active set length != node count".into()));
        }
        let mut total = 0.0;
        for i in 0..self.node_count() {
            total += self.unary.cost(i, x.get(i));
        }
        for (e, &(i, j)) in self.topology.edges().iter().enumerate() {
            let d = x.get(i) as isize - x.get(j) as isize;
            let v = if active[i] && active[j] { self.prior.h(d) } else { self.prior.g(d) };
            total += self.edge_weights[e] * v;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::PriorKind;

    fn two_node_model(t: usize, labels: usize) -> EnergyModel {
        let topo = GraphTopology::new(2, vec![(0, 1)], None).unwrap();
        let ls = LabelSpace::new(labels).unwrap();
        let unary = UnaryTable::zeros(2, labels);
        let prior = Prior::make(PriorKind::TruncatedQuadratic, t, labels).unwrap();
        EnergyModel::new(topo, ls, unary, prior, vec![1.0]).unwrap()
    }

    #[test]
    fn energy_of_identity_labeling() {
        let m = two_node_model(2, 4);
        let x = Labeling::constant(2, 0);
        assert_eq!(m.energy(&x, PriorMode::G).unwrap(), 0.0);
    }

    #[test]
    fn energy_uses_truncated_prior() {
        let m = two_node_model(2, 4);
        let x = Labeling::new(vec![0, 3]);
        // g(3) = min(9, 4) = 4
        assert_eq!(m.energy(&x, PriorMode::G).unwrap(), 4.0);
    }

    #[test]
    fn chain_hand_sum() {
        let topo = GraphTopology::chain(3).unwrap();
        let ls = LabelSpace::new(2).unwrap();
        let unary = UnaryTable::new(vec![0.0, 5.0, 5.0, 0.0, 0.0, 5.0], 3, 2).unwrap();
        let prior = Prior::make(PriorKind::TruncatedQuadratic, 1, 2).unwrap();
        let m = EnergyModel::new(topo, ls, unary, prior, vec![1.0, 1.0]).unwrap();
        let x = Labeling::new(vec![0, 1, 0]);
        assert_eq!(m.energy(&x, PriorMode::G).unwrap(), 2.0);
    }

    #[test]
    fn hybrid_matches_g_and_h_at_extremes() {
        let m = two_node_model(2, 4);
        let x = Labeling::new(vec![0, 3]);
        let none = vec![false, false];
        let all = vec![true, true];
        assert_eq!(
            m.hybrid_energy(&x, &none).unwrap(),
            m.energy(&x, PriorMode::G).unwrap()
        );
        assert_eq!(
            m.hybrid_energy(&x, &all).unwrap(),
            m.energy(&x, PriorMode::H).unwrap()
        );
        // h(3) = 2*2*3 - 4 = 8 for T = 2
        assert_eq!(m.hybrid_energy(&x, &all).unwrap(), 8.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = two_node_model(2, 4);
        let x = Labeling::new(vec![0]);
        assert!(m.energy(&x, PriorMode::G).is_err());
        let x = Labeling::new(vec![0, 9]);
        assert!(m.energy(&x, PriorMode::G).is_err());
    }

    #[test]
    fn duplicate_edges_rejected() {
        assert!(GraphTopology::new(3, vec![(0, 1), (1, 0)], None).is_err());
        assert!(GraphTopology::new(3, vec![(0, 0)], None).is_err());
    }

    #[test]
    fn grid_edge_count() {
        let g = GraphTopology::grid4(4, 3).unwrap();
        // 2wh - w - h
        assert_eq!(g.edge_count(), 2 * 4 * 3 - 4 - 3);
    }
}
