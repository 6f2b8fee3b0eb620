//! Brute-force exact minimization for small instances.
//!
//! Deliberately free of any pruning: these functions are the ground truth
//! that every solver is tested against, so they must stay obviously correct.

use crate::energy::{EnergyModel, Labeling, PriorMode};
use crate::error::{Error, Result};
use crate::ishikawa::SubProblem;

/// Cap on the number of enumerated states.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_states: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_states: 10_000_000 }
    }
}

/// Globally minimal labeling by full enumeration, ties broken toward the
/// lexicographically smallest labeling (node 0 most significant).
pub fn exact_minimum(
    model: &EnergyModel,
    mode: PriorMode,
    budget: OracleBudget,
) -> Result<(Labeling, f64)> {
    let n = model.node_count();
    let l = model.label_count();
    let states = (l as u128)
        .checked_pow(n as u32)
        .ok_or(Error::BudgetExceeded { states: u128::MAX, cap: budget.max_states })?;
    if states > budget.max_states {
        return Err(Error::BudgetExceeded { states, cap: budget.max_states });
    }

    let mut x = Labeling::constant(n, 0);
    let mut best = x.clone();
    let mut best_energy = model.energy(&x, mode)?;
    while odometer_step(&mut x, l) {
        let e = model.energy(&x, mode)?;
        if e < best_energy {
            best_energy = e;
            best = x.clone();
        }
    }
    Ok((best, best_energy))
}

/// Exact minimum of a move's reduced energy over the product of candidate
/// intervals. Returns absolute labels for the active nodes.
pub fn exact_move_minimum(sub: &SubProblem, budget: OracleBudget) -> Result<(Vec<usize>, f64)> {
    if sub.is_empty() {
        return Ok((Vec::new(), sub.constant_term()));
    }
    let states = sub.state_count();
    if states > budget.max_states {
        return Err(Error::BudgetExceeded { states, cap: budget.max_states });
    }
    let intervals = sub.intervals();
    let mut labels: Vec<usize> = intervals.iter().map(|&(lo, _)| lo).collect();
    let mut best = labels.clone();
    let mut best_energy = sub.evaluate(&labels);
    while interval_odometer_step(&mut labels, intervals) {
        let e = sub.evaluate(&labels);
        if e < best_energy {
            best_energy = e;
            best = labels.clone();
        }
    }
    Ok((best, best_energy))
}

/// Advances to the next labeling in lexicographic order (last node fastest).
/// Returns false after the last state.
fn odometer_step(x: &mut Labeling, label_count: usize) -> bool {
    for i in (0..x.len()).rev() {
        if x.get(i) + 1 < label_count {
            x.set(i, x.get(i) + 1);
            return true;
        }
        x.set(i, 0);
    }
    false
}

fn interval_odometer_step(labels: &mut [usize], intervals: &[(usize, usize)]) -> bool {
    for i in (0..labels.len()).rev() {
        if labels[i] < intervals[i].1 {
            labels[i] += 1;
            return true;
        }
        labels[i] = intervals[i].0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{GraphTopology, LabelSpace, UnaryTable};
    use crate::priors::{Prior, PriorKind};

    #[test]
    fn single_node_unary_argmin() {
        let topo = GraphTopology::new(1, vec![], None).unwrap();
        let m = EnergyModel::new(
            topo,
            LabelSpace::new(3).unwrap(),
            UnaryTable::new(vec![2.0, 0.5, 1.0], 1, 3).unwrap(),
            Prior::make(PriorKind::TruncatedQuadratic, 1, 3).unwrap(),
            vec![],
        )
        .unwrap();
        let (x, e) = exact_minimum(&m, PriorMode::G, OracleBudget::default()).unwrap();
        assert_eq!(x.as_slice(), &[1]);
        assert_eq!(e, 0.5);
    }

    #[test]
    fn strong_smoothing_aligns_labels() {
        let topo = GraphTopology::chain(2).unwrap();
        let m = EnergyModel::new(
            topo,
            LabelSpace::new(3).unwrap(),
            UnaryTable::new(vec![0.0, 1.0, 5.0, 5.0, 0.0, 9.0], 2, 3).unwrap(),
            Prior::make(PriorKind::TruncatedQuadratic, 2, 3).unwrap(),
            vec![100.0],
        )
        .unwrap();
        let (x, e) = exact_minimum(&m, PriorMode::G, OracleBudget::default()).unwrap();
        // Both nodes take the label with the smallest summed unaries.
        assert_eq!(x.as_slice(), &[1, 1]);
        assert_eq!(e, 1.0);
    }

    #[test]
    fn budget_enforced() {
        let topo = GraphTopology::chain(30).unwrap();
        let m = EnergyModel::new(
            topo,
            LabelSpace::new(6).unwrap(),
            UnaryTable::zeros(30, 6),
            Prior::make(PriorKind::TruncatedQuadratic, 2, 6).unwrap(),
            vec![1.0; 29],
        )
        .unwrap();
        assert!(matches!(
            exact_minimum(&m, PriorMode::G, OracleBudget::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lexicographic_tie_break() {
        // Two nodes, all-zero energy: the first labeling wins.
        let topo = GraphTopology::chain(2).unwrap();
        let m = EnergyModel::new(
            topo,
            LabelSpace::new(2).unwrap(),
            UnaryTable::zeros(2, 2),
            Prior::make(PriorKind::TruncatedLinear, 1, 2).unwrap(),
            vec![0.0],
        )
        .unwrap();
        let (x, _) = exact_minimum(&m, PriorMode::G, OracleBudget::default()).unwrap();
        assert_eq!(x.as_slice(), &[0, 0]);
    }
}
