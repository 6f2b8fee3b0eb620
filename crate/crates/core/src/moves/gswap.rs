//! Generalized range moves: large active sets, full label range, convex
//! surrogate on active-active edges.
//!
//! The active set obeys one rule: two adjacent active nodes never differ by
//! more than the truncation threshold. At the current labeling the surrogate
//! then agrees with the true prior on every active-active edge, so the
//! hybrid subproblem energy equals the true energy and each exact solve can
//! only lower it.
//!
//! The full variant keeps every node active and instead drops the edges
//! whose current labels differ by more than the threshold, charging their
//! current cost as a constant. That is only monotone when g is flat beyond
//! the threshold, so it refuses priors like Cauchy.

use crate::energy::{EnergyModel, GraphTopology, Labeling, PriorMode};
use crate::error::{Error, Result};
use crate::ishikawa::full_intervals;
use crate::moves::{apply_plan, MovePlan};

/// How the active set treats an over-threshold edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveStrategy {
    /// Omit the larger-labeled endpoint on even iterations, the smaller on
    /// odd ones. Every node is active in at least one parity.
    Alternating,
    /// Keep endpoints labeled inside [alpha, beta]; fall back to the
    /// alternating rule when neither endpoint is in range. Yields a
    /// superset of the plain range-move active set.
    RangeAnchored { alpha: usize, beta: usize },
}

/// Selects an active set satisfying the adjacency rule |x_i - x_j| <= T.
///
/// Edges are scanned in canonical order; an over-threshold edge with an
/// already-omitted endpoint is skipped, since the omission already
/// reconciles it.
pub fn gswap_select_active(
    x: &Labeling,
    topology: &GraphTopology,
    trunc: usize,
    parity: usize,
    strategy: ActiveStrategy,
) -> Vec<bool> {
    let mut active = vec![true; topology.node_count()];
    let omit_larger = parity % 2 == 0;
    for &(i, j) in topology.edges() {
        let (xi, xj) = (x.get(i), x.get(j));
        if xi.abs_diff(xj) <= trunc {
            continue;
        }
        if !active[i] || !active[j] {
            continue;
        }
        let (larger, smaller) = if xi > xj { (i, j) } else { (j, i) };
        let victim = match strategy {
            ActiveStrategy::Alternating => {
                if omit_larger {
                    larger
                } else {
                    smaller
                }
            }
            ActiveStrategy::RangeAnchored { alpha, beta } => {
                let in_range = |l: usize| l >= alpha && l <= beta;
                match (in_range(xi), in_range(xj)) {
                    (true, false) => j,
                    (false, true) => i,
                    // Both out of range (both in range cannot violate the
                    // threshold when beta - alpha <= T).
                    _ => {
                        if omit_larger {
                            larger
                        } else {
                            smaller
                        }
                    }
                }
            }
        };
        active[victim] = false;
    }
    active
}

/// Builds the move plan for one generalized-swap iteration.
pub fn gswap_plan(model: &EnergyModel, x: &Labeling, parity: usize) -> MovePlan {
    let active = gswap_select_active(
        x,
        model.topology(),
        model.prior().trunc(),
        parity,
        ActiveStrategy::Alternating,
    );
    MovePlan {
        active,
        intervals: full_intervals(model),
        pair_mode: PriorMode::H,
        drop_over_threshold: false,
    }
}

/// One generalized-swap move. The exact hybrid optimum never raises the
/// true energy.
pub fn gswap_move(model: &EnergyModel, x: &Labeling, parity: usize) -> Result<Labeling> {
    let plan = gswap_plan(model, x, parity);
    let (labeling, _) = apply_plan(model, x, &plan)?;
    Ok(labeling)
}

/// Builds the move plan for one full-variant iteration.
pub fn gswapf_plan(model: &EnergyModel) -> MovePlan {
    MovePlan {
        active: vec![true; model.node_count()],
        intervals: full_intervals(model),
        pair_mode: PriorMode::H,
        drop_over_threshold: true,
    }
}

/// One full generalized-swap move: all nodes active, over-threshold edges
/// frozen as constants. Requires a truncated-flat prior.
pub fn gswapf_move(model: &EnergyModel, x: &Labeling) -> Result<Labeling> {
    if !model.prior().is_truncated_flat() {
        return Err(Error::Refused(format!(
            "the full generalized swap needs a prior that is flat beyond its threshold \
             (dropped-edge costs must not rise); '{}' is not",
            model.prior().kind().name()
        )));
    }
    let plan = gswapf_plan(model);
    let (labeling, _) = apply_plan(model, x, &plan)?;
    Ok(labeling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{LabelSpace, UnaryTable};
    use crate::priors::{Prior, PriorKind};

    fn chain_labels(labels: Vec<usize>) -> (GraphTopology, Labeling) {
        let topo = GraphTopology::chain(labels.len()).unwrap();
        (topo, Labeling::new(labels))
    }

    #[test]
    fn within_threshold_keeps_all_active() {
        let (topo, x) = chain_labels(vec![0, 2, 3]);
        let active = gswap_select_active(&x, &topo, 3, 0, ActiveStrategy::Alternating);
        assert_eq!(active, vec![true, true, true]);
    }

    #[test]
    fn alternating_scan_even_and_odd() {
        // Chain labels (0, 10, 0), T = 3.
        let (topo, x) = chain_labels(vec![0, 10, 0]);
        let even = gswap_select_active(&x, &topo, 3, 0, ActiveStrategy::Alternating);
        assert_eq!(even, vec![true, false, true]);
        let odd = gswap_select_active(&x, &topo, 3, 1, ActiveStrategy::Alternating);
        // Edge (0,1) omits node 0; edge (1,2) then omits node 2.
        assert_eq!(odd, vec![false, true, false]);
        // Across the two parities every node is active at least once.
        for i in 0..3 {
            assert!(even[i] || odd[i], "node {i} never active");
        }
    }

    #[test]
    fn range_anchored_keeps_in_range_endpoints() {
        let (topo, x) = chain_labels(vec![1, 9, 0]);
        let active =
            gswap_select_active(&x, &topo, 3, 0, ActiveStrategy::RangeAnchored { alpha: 0, beta: 2 });
        // Both edges violate; node 1 (label 9) is out of range both times.
        assert_eq!(active, vec![true, false, true]);
    }

    #[test]
    fn condition_two_holds_after_selection() {
        let (topo, x) = chain_labels(vec![0, 5, 9, 2, 8]);
        for parity in 0..2 {
            let active = gswap_select_active(&x, &topo, 2, parity, ActiveStrategy::Alternating);
            for &(i, j) in topo.edges() {
                if active[i] && active[j] {
                    assert!(x.get(i).abs_diff(x.get(j)) <= 2);
                }
            }
        }
    }

    #[test]
    fn gswapf_refuses_cauchy() {
        let topo = GraphTopology::chain(2).unwrap();
        let m = EnergyModel::new(
            topo,
            LabelSpace::new(4).unwrap(),
            UnaryTable::zeros(2, 4),
            Prior::make(PriorKind::Cauchy, 2, 4).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let x = Labeling::constant(2, 0);
        match gswapf_move(&m, &x) {
            Err(Error::Refused(msg)) => assert!(msg.contains("cauchy")),
            other => panic!("expected refusal, got {other:?}"),
        }
    }
}
