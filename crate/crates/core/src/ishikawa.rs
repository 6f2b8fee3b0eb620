//! Exact minimization of submodular multi-label subproblems by layered
//! min-cut.
//!
//! A move freezes part of the graph and optimizes the rest over per-node
//! contiguous label intervals. Edges fall into four classes: frozen-frozen
//! edges are constants, active-frozen edges fold into effective unaries
//! (always with the true prior g), active-active edges keep a pairwise term
//! under a chosen prior table, and — for the full range move — active-active
//! edges whose current labels differ by more than T may be dropped as
//! constants.
//!
//! The layered graph encodes each active node as a column of threshold
//! indicators. A monotone cut through column k at position p assigns label
//! `lo_k + p`. Pairwise costs enter as inter-column arcs with capacity
//! `w * [f(d+1) - 2 f(d) + f(d-1)]`, the discrete second difference of the
//! prior; the linear first-difference parts are absorbed into the column
//! arcs. Second differences vanish in the linear tail of the generalized
//! Huber function, so those arcs are omitted and each edge contributes
//! O(l T) arcs instead of O(l^2).

use std::io::Write;

use crate::energy::{EnergyModel, Labeling, PriorMode};
use crate::error::{Error, Result};
use crate::maxflow::{self, FlowNetwork, CAP_INF};
use crate::priors::Prior;

/// Inter-column arcs with capacity at or below this are omitted.
const ARC_OMIT_TOL: f64 = 1e-12;

/// Negative second differences beyond this indicate a non-convex pair table.
const CONVEXITY_TOL: f64 = 1e-9;

/// A pairwise term between two active nodes, evaluated with the chosen
/// prior table on the signed difference of their labels.
#[derive(Debug, Clone, Copy)]
pub struct SubEdge {
    /// Indices into the subproblem's active node list.
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub mode: PriorMode,
}

/// A reduced optimization problem over the active nodes.
#[derive(Debug, Clone)]
pub struct SubProblem {
    /// Model node ids of the active nodes, ascending.
    nodes: Vec<usize>,
    /// Candidate interval (lo, hi) per active node.
    intervals: Vec<(usize, usize)>,
    /// Effective unary costs: original unaries plus folded boundary terms.
    unary: Vec<Vec<f64>>,
    edges: Vec<SubEdge>,
    /// Energy of everything frozen or dropped.
    constant: f64,
    prior: Prior,
    /// Current labels of the active nodes (the identity move).
    current: Vec<usize>,
}

impl SubProblem {
    pub fn active_nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn edges(&self) -> &[SubEdge] {
        &self.edges
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn unary_effective(&self, k: usize) -> &[f64] {
        &self.unary[k]
    }

    pub fn current_labels(&self) -> &[usize] {
        &self.current
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of states in the feasible set (product of interval sizes).
    pub fn state_count(&self) -> u128 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as u128)
            .try_fold(1u128, |acc, n| acc.checked_mul(n))
            .unwrap_or(u128::MAX)
    }

    /// Evaluates the reduced energy at an assignment of absolute labels to
    /// the active nodes, including the constant term.
    pub fn evaluate(&self, labels: &[usize]) -> f64 {
        assert_eq!(labels.len(), self.nodes.len(), "assignment length mismatch");
        let mut total = self.constant;
        for (k, &l) in labels.iter().enumerate() {
            let (lo, hi) = self.intervals[k];
            assert!(l >= lo && l <= hi, "label {l} outside candidate interval");
            total += self.unary[k][l - lo];
        }
        for e in &self.edges {
            let d = labels[e.a] as isize - labels[e.b] as isize;
            total += e.weight * self.prior.value(e.mode, d);
        }
        total
    }

    /// Writes the assignment back into a full labeling.
    pub fn merge_into(&self, x: &Labeling, labels: &[usize]) -> Labeling {
        let mut out = x.clone();
        for (k, &node) in self.nodes.iter().enumerate() {
            out.set(node, labels[k]);
        }
        out
    }
}

/// Reduces the model to a subproblem over `active` nodes.
///
/// `intervals` gives the candidate interval per model node (entries for
/// frozen nodes are ignored). Active-active edges keep a pairwise term with
/// `pair_mode`'s table, except that with `drop_over_threshold` set, edges
/// whose current label difference exceeds T contribute their current g-cost
/// as a constant and disappear from the optimization. Boundary terms always
/// use g.
pub fn build_subproblem(
    model: &EnergyModel,
    x: &Labeling,
    active: &[bool],
    intervals: &[(usize, usize)],
    pair_mode: PriorMode,
    drop_over_threshold: bool,
) -> Result<SubProblem> {
    let n = model.node_count();
    if x.len() != n || active.len() != n || intervals.len() != n {
        return Err(Error::DimensionMismatch("active/interval vectors must cover all nodes".into()));
    }
    let max_label = model.labels().max_label();
    let mut index = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for i in 0..n {
        if !active[i] {
            continue;
        }
        let (lo, hi) = intervals[i];
        if lo > hi || hi > max_label {
            return Err(Error::ContractViolation(format!(
                "bad candidate interval ({lo}, {hi}) at node {i}"
            )));
        }
        if x.get(i) < lo || x.get(i) > hi {
            return Err(Error::ContractViolation(format!(
                "current label {} of node {i} outside its candidate interval ({lo}, {hi})",
                x.get(i)
            )));
        }
        index[i] = nodes.len();
        nodes.push(i);
    }

    let mut sub_intervals = Vec::with_capacity(nodes.len());
    let mut unary = Vec::with_capacity(nodes.len());
    let mut current = Vec::with_capacity(nodes.len());
    for &i in &nodes {
        let (lo, hi) = intervals[i];
        sub_intervals.push((lo, hi));
        unary.push(model.unary().row(i)[lo..=hi].to_vec());
        current.push(x.get(i));
    }

    let mut constant = 0.0;
    for i in 0..n {
        if index[i] == usize::MAX {
            constant += model.unary().cost(i, x.get(i));
        }
    }

    let prior = model.prior();
    let trunc = prior.trunc() as isize;
    let mut edges = Vec::new();
    for (e, &(i, j)) in model.topology().edges().iter().enumerate() {
        let w = model.edge_weights()[e];
        let (ai, aj) = (index[i], index[j]);
        match (ai != usize::MAX, aj != usize::MAX) {
            (false, false) => {
                constant += w * prior.g(x.get(i) as isize - x.get(j) as isize);
            }
            (true, false) => {
                let xj = x.get(j) as isize;
                let (lo, hi) = intervals[i];
                for l in lo..=hi {
                    unary[ai][l - lo] += w * prior.g(l as isize - xj);
                }
            }
            (false, true) => {
                let xi = x.get(i) as isize;
                let (lo, hi) = intervals[j];
                for l in lo..=hi {
                    unary[aj][l - lo] += w * prior.g(xi - l as isize);
                }
            }
            (true, true) => {
                let d = x.get(i) as isize - x.get(j) as isize;
                if drop_over_threshold && d.abs() > trunc {
                    constant += w * prior.g(d);
                } else {
                    edges.push(SubEdge { a: ai, b: aj, weight: w, mode: pair_mode });
                }
            }
        }
    }

    Ok(SubProblem {
        nodes,
        intervals: sub_intervals,
        unary,
        edges,
        constant,
        prior: prior.clone(),
        current,
    })
}

/// Arc and node counts of a layered graph, used to verify the sparsity of
/// the generalized-Huber construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct LayeredGraphStats {
    pub graph_nodes: usize,
    pub column_arcs: usize,
    pub monotone_arcs: usize,
    pub intercolumn_arcs: usize,
}

/// The s-t encoding of a subproblem. Column k holds one threshold node per
/// label step; a finite cut crosses each column exactly once and the cut
/// value plus `constant_offset` equals the reduced energy of the decoded
/// assignment.
pub struct LayeredGraph {
    net: FlowNetwork,
    /// (first graph-node id, lo, size) per active node.
    columns: Vec<(usize, usize, usize)>,
    offset: f64,
    stats: LayeredGraphStats,
}

impl LayeredGraph {
    pub fn build(sub: &SubProblem) -> Result<LayeredGraph> {
        // Wide spans first: validate convexity of every pair table over the
        // candidate difference range.
        for e in &sub.edges {
            let (lo_a, hi_a) = sub.intervals[e.a];
            let (lo_b, hi_b) = sub.intervals[e.b];
            let d_min = lo_a as isize - hi_b as isize;
            let d_max = hi_a as isize - lo_b as isize;
            for d in (d_min + 1)..d_max {
                let f = |a| sub.prior.value(e.mode, a);
                if f(d + 1) - 2.0 * f(d) + f(d - 1) < -CONVEXITY_TOL {
                    return Err(Error::NonConvexPrior(format!(
                        "pair table not convex at difference {d} over span [{d_min}, {d_max}]; \
                         the caller must pass the convex surrogate"
                    )));
                }
            }
        }

        let sizes: Vec<usize> = sub.intervals.iter().map(|&(lo, hi)| hi - lo + 1).collect();
        let mut columns = Vec::with_capacity(sub.nodes.len());
        let mut next = 0usize;
        for (k, &(lo, _)) in sub.intervals.iter().enumerate() {
            columns.push((next, lo, sizes[k]));
            next += sizes[k].saturating_sub(1);
        }
        let source = next;
        let sink = next + 1;
        let mut net = FlowNetwork::new(next + 2, source, sink)?;
        let mut stats = LayeredGraphStats { graph_nodes: next + 2, ..Default::default() };

        let mut offset = sub.constant;
        // Effective per-label profiles, adjusted by the linear parts of the
        // pairwise decomposition.
        let mut profile: Vec<Vec<f64>> = sub.unary.clone();

        for e in &sub.edges {
            let f = |a| sub.prior.value(e.mode, a);
            let (lo_a, _) = sub.intervals[e.a];
            let (lo_b, _) = sub.intervals[e.b];
            let delta = lo_a as isize - lo_b as isize;
            let (na, nb) = (sizes[e.a], sizes[e.b]);

            // psi(p, q) = w * f(delta + p - q); constant and marginals:
            offset += e.weight * f(delta);
            for p in 1..na {
                profile[e.a][p] += e.weight * (f(delta + p as isize) - f(delta));
            }
            for q in 1..nb {
                profile[e.b][q] += e.weight * (f(delta - q as isize) - f(delta));
            }

            // Mixed second differences become inter-column arcs; the
            // -c * y_a term of the decomposition accumulates on column a.
            for t in 1..na {
                let mut row_sum = 0.0;
                for s in 1..nb {
                    let d = delta + t as isize - s as isize;
                    let c = e.weight * (f(d + 1) - 2.0 * f(d) + f(d - 1));
                    let c = c.max(0.0);
                    if c > ARC_OMIT_TOL {
                        net.add_arc(columns[e.a].0 + t - 1, columns[e.b].0 + s - 1, c)?;
                        stats.intercolumn_arcs += 1;
                        row_sum += c;
                    }
                }
                profile_apply_from(&mut profile[e.a], t, -row_sum);
            }
        }

        // Column arcs: reparameterize each profile to be nonnegative, then
        // lay the label costs along the source-to-sink path.
        for (k, &(start, _, nk)) in columns.iter().enumerate() {
            let min = profile[k].iter().cloned().fold(f64::INFINITY, f64::min);
            offset += min;
            if nk == 1 {
                continue;
            }
            for p in 0..nk {
                let cap = profile[k][p] - min;
                let from = if p == 0 { source } else { start + p - 1 };
                let to = if p == nk - 1 { sink } else { start + p };
                net.add_arc(from, to, cap)?;
                stats.column_arcs += 1;
            }
            for p in 1..nk - 1 {
                net.add_arc(start + p, start + p - 1, CAP_INF)?;
                stats.monotone_arcs += 1;
            }
        }

        Ok(LayeredGraph { net, columns, offset, stats })
    }

    pub fn network(&self) -> &FlowNetwork {
        &self.net
    }

    pub fn stats(&self) -> LayeredGraphStats {
        self.stats
    }

    /// Constant such that cut value + offset = reduced energy.
    pub fn constant_offset(&self) -> f64 {
        self.offset
    }

    /// The monotone cut side corresponding to an assignment (for tests of
    /// the cut/energy correspondence).
    pub fn side_for_assignment(&self, labels: &[usize]) -> Vec<bool> {
        let mut side = vec![false; self.net.node_count()];
        side[self.net.source()] = true;
        for (k, &(start, lo, nk)) in self.columns.iter().enumerate() {
            let p = labels[k] - lo;
            for t in 0..nk.saturating_sub(1) {
                side[start + t] = t < p;
            }
        }
        side
    }

    /// Decodes a cut side into absolute labels.
    pub fn decode(&self, source_side: &[bool]) -> Vec<usize> {
        self.columns
            .iter()
            .map(|&(start, lo, nk)| {
                let p = (0..nk.saturating_sub(1)).filter(|&t| source_side[start + t]).count();
                lo + p
            })
            .collect()
    }

    /// Runs max-flow and decodes the optimal assignment.
    pub fn min_cut(&self) -> Result<(Vec<usize>, f64)> {
        let cut = maxflow::max_flow(&self.net)?;
        Ok((self.decode(&cut.source_side), cut.flow_value))
    }

    /// Debug dump in DIMACS max-flow form.
    pub fn write_dimacs<W: Write>(&self, w: &mut W) -> Result<()> {
        maxflow::write_dimacs(&self.net, w)
    }
}

fn profile_apply_from(profile: &mut [f64], from: usize, delta: f64) {
    for v in &mut profile[from..] {
        *v += delta;
    }
}

/// Exactly minimizes the subproblem. Returns the optimal absolute labels of
/// the active nodes and the reduced energy (including the constant term).
pub fn solve_exact(sub: &SubProblem) -> Result<(Vec<usize>, f64)> {
    if sub.is_empty() {
        return Ok((Vec::new(), sub.constant));
    }
    let graph = LayeredGraph::build(sub)?;
    let (labels, flow) = graph.min_cut()?;
    let energy = sub.evaluate(&labels);
    debug_assert!(
        (flow + graph.constant_offset() - energy).abs() <= 1e-6 * (1.0 + energy.abs()),
        "cut value {} + offset {} != evaluated energy {}",
        flow,
        graph.constant_offset(),
        energy
    );
    Ok((labels, energy))
}

/// Candidate intervals spanning the whole label set.
pub fn full_intervals(model: &EnergyModel) -> Vec<(usize, usize)> {
    vec![(0, model.labels().max_label()); model.node_count()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{GraphTopology, LabelSpace, UnaryTable};
    use crate::priors::PriorKind;

    fn chain_model(unaries: Vec<Vec<f64>>, weights: Vec<f64>, kind: PriorKind, t: usize) -> EnergyModel {
        let n = unaries.len();
        let l = unaries[0].len();
        let topo = GraphTopology::chain(n).unwrap();
        let flat: Vec<f64> = unaries.into_iter().flatten().collect();
        EnergyModel::new(
            topo,
            LabelSpace::new(l).unwrap(),
            UnaryTable::new(flat, n, l).unwrap(),
            Prior::make(kind, t, l).unwrap(),
            weights,
        )
        .unwrap()
    }

    #[test]
    fn all_active_full_range_keeps_unaries() {
        let m = chain_model(
            vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]],
            vec![1.0],
            PriorKind::TruncatedQuadratic,
            1,
        );
        let x = Labeling::constant(2, 0);
        let sub = build_subproblem(
            &m,
            &x,
            &[true, true],
            &full_intervals(&m),
            PriorMode::H,
            false,
        )
        .unwrap();
        assert_eq!(sub.constant_term(), 0.0);
        assert_eq!(sub.unary_effective(0), &[1.0, 2.0, 3.0]);
        assert_eq!(sub.unary_effective(1), &[3.0, 2.0, 1.0]);
        assert_eq!(sub.edges().len(), 1);
    }

    #[test]
    fn frozen_neighbor_folds_with_g() {
        // 2-node chain, node 1 frozen at label 4, node 0 active over 0..=5,
        // w = 2, truncated quadratic T = 2.
        let m = chain_model(
            vec![vec![0.0; 6], vec![0.0; 6]],
            vec![2.0],
            PriorKind::TruncatedQuadratic,
            2,
        );
        let x = Labeling::new(vec![0, 4]);
        let sub = build_subproblem(
            &m,
            &x,
            &[true, false],
            &full_intervals(&m),
            PriorMode::H,
            false,
        )
        .unwrap();
        for l in 0..6usize {
            let expect = 2.0 * ((l as f64 - 4.0).powi(2)).min(4.0);
            assert_eq!(sub.unary_effective(0)[l], expect, "label {l}");
        }
    }

    #[test]
    fn all_frozen_is_constant() {
        let m = chain_model(
            vec![vec![1.0, 2.0], vec![0.5, 0.0]],
            vec![1.0],
            PriorKind::TruncatedQuadratic,
            1,
        );
        let x = Labeling::new(vec![1, 0]);
        let sub = build_subproblem(
            &m,
            &x,
            &[false, false],
            &full_intervals(&m),
            PriorMode::G,
            false,
        )
        .unwrap();
        assert!(sub.is_empty());
        let full = m.energy(&x, PriorMode::G).unwrap();
        assert_eq!(sub.constant_term(), full);
        let (labels, energy) = solve_exact(&sub).unwrap();
        assert!(labels.is_empty());
        assert_eq!(energy, full);
    }

    #[test]
    fn single_node_argmin() {
        let m = chain_model(
            vec![vec![3.0, 1.0, 2.0], vec![0.0, 0.0, 0.0]],
            vec![0.0],
            PriorKind::TruncatedQuadratic,
            1,
        );
        let x = Labeling::constant(2, 0);
        let sub = build_subproblem(
            &m,
            &x,
            &[true, false],
            &[(0, 2), (0, 2)],
            PriorMode::H,
            false,
        )
        .unwrap();
        let (labels, energy) = solve_exact(&sub).unwrap();
        assert_eq!(labels, vec![1]);
        assert_eq!(energy, 1.0);
    }

    #[test]
    fn two_node_quadratic() {
        let m = chain_model(
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![1.0],
            PriorKind::TruncatedQuadratic,
            1,
        );
        let x = Labeling::constant(2, 0);
        let sub = build_subproblem(
            &m,
            &x,
            &[true, true],
            &full_intervals(&m),
            PriorMode::H,
            false,
        )
        .unwrap();
        let (labels, energy) = solve_exact(&sub).unwrap();
        assert_eq!(labels, vec![0, 1]);
        assert!((energy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn current_label_outside_interval_rejected() {
        let m = chain_model(
            vec![vec![0.0; 4], vec![0.0; 4]],
            vec![1.0],
            PriorKind::TruncatedQuadratic,
            1,
        );
        let x = Labeling::new(vec![3, 0]);
        let err = build_subproblem(&m, &x, &[true, true], &[(0, 1), (0, 1)], PriorMode::H, false);
        assert!(err.is_err());
    }

    #[test]
    fn non_convex_pair_table_refused() {
        // Full-range subproblem with the truncated (non-convex) g table.
        let m = chain_model(
            vec![vec![0.0; 6], vec![0.0; 6]],
            vec![1.0],
            PriorKind::TruncatedQuadratic,
            2,
        );
        let x = Labeling::constant(2, 0);
        let sub = build_subproblem(
            &m,
            &x,
            &[true, true],
            &full_intervals(&m),
            PriorMode::G,
            false,
        )
        .unwrap();
        match solve_exact(&sub) {
            Err(Error::NonConvexPrior(_)) => {}
            other => panic!("expected NonConvexPrior, got {other:?}"),
        }
    }
}
