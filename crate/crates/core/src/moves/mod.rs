//! Move-making solvers.
//!
//! Every solver iterates the same scheme: pick a choice function that can
//! reproduce the current labeling, minimize the reduced energy exactly (or
//! for expansion, a repaired surrogate), and keep the result only if the
//! true energy does not rise. The solvers differ only in their choice
//! functions:
//!
//! * `alpha_exp` — binary keep-or-switch-to-alpha, repaired where
//!   non-submodular;
//! * `ab_swap` — binary swap between two labels;
//! * `rswap` — nodes inside a label window, re-optimized over the window;
//! * `rswape` — same active set over a widened window with the convex
//!   surrogate on interior edges;
//! * `gswap` — threshold-compatible active set over the whole label range;
//! * `gswapf` — all nodes active, over-threshold edges frozen as constants.

mod binary;
mod gswap;
mod range;

pub use binary::{alpha_expansion_move, alphabeta_swap_move, ExpansionOutcome};
pub use gswap::{gswap_move, gswap_plan, gswap_select_active, gswapf_move, gswapf_plan, ActiveStrategy};
pub use range::{range_swap_move, range_swap_plan, RangeMoveVariant};

use std::io::Write;
use std::time::Instant;

use crate::energy::{EnergyModel, GraphTopology, Labeling, PriorMode};
use crate::error::{Error, Result};
use crate::ishikawa::{build_subproblem, solve_exact};

/// The six shipped solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    AlphaExpansion,
    AlphaBetaSwap,
    RangeSwap,
    RangeSwapExtended,
    GSwap,
    GSwapFull,
}

impl Solver {
    pub const ALL: [Solver; 6] = [
        Solver::AlphaExpansion,
        Solver::AlphaBetaSwap,
        Solver::RangeSwap,
        Solver::RangeSwapExtended,
        Solver::GSwap,
        Solver::GSwapFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::AlphaExpansion => "alpha_exp",
            Solver::AlphaBetaSwap => "ab_swap",
            Solver::RangeSwap => "rswap",
            Solver::RangeSwapExtended => "rswape",
            Solver::GSwap => "gswap",
            Solver::GSwapFull => "gswapf",
        }
    }

    pub fn parse(s: &str) -> Option<Solver> {
        match s {
            "alpha_exp" | "alpha_expansion" => Some(Solver::AlphaExpansion),
            "ab_swap" | "alphabeta_swap" => Some(Solver::AlphaBetaSwap),
            "rswap" => Some(Solver::RangeSwap),
            "rswape" => Some(Solver::RangeSwapExtended),
            "gswap" => Some(Solver::GSwap),
            "gswapf" => Some(Solver::GSwapFull),
            _ => None,
        }
    }
}

/// One iteration's choice function for the interval-based moves: the active
/// set, a candidate interval per node, and how active-active edges are
/// treated.
#[derive(Debug, Clone)]
pub struct MovePlan {
    pub active: Vec<bool>,
    pub intervals: Vec<(usize, usize)>,
    pub pair_mode: PriorMode,
    pub drop_over_threshold: bool,
}

impl MovePlan {
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Checks the active-set rule: no two adjacent active nodes may differ
    /// by more than the threshold.
    pub fn satisfies_adjacency_rule(
        &self,
        x: &Labeling,
        topology: &GraphTopology,
        trunc: usize,
    ) -> bool {
        topology.edges().iter().all(|&(i, j)| {
            !(self.active[i] && self.active[j]) || x.get(i).abs_diff(x.get(j)) <= trunc
        })
    }
}

/// Builds the plan's subproblem, solves it exactly, and merges the optimum
/// back into the labeling. Returns the new labeling and the reduced energy
/// at the optimum (constant term included).
pub fn apply_plan(model: &EnergyModel, x: &Labeling, plan: &MovePlan) -> Result<(Labeling, f64)> {
    let sub = build_subproblem(
        model,
        x,
        &plan.active,
        &plan.intervals,
        plan.pair_mode,
        plan.drop_over_threshold,
    )?;
    if sub.is_empty() {
        return Ok((x.clone(), sub.constant_term()));
    }
    let (labels, energy) = solve_exact(&sub)?;
    Ok((sub.merge_into(x, &labels), energy))
}

/// Options shared by all solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// A sweep (or iteration pair, for gswap) that decreases the energy by
    /// no more than this counts as converged.
    pub tol: f64,
    /// Candidate-interval margin for the extended range swap.
    pub epsilon: usize,
    /// Safety cap on sweeps (or moves, for the generalized solvers).
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-6, epsilon: 2, max_sweeps: 1000 }
    }
}

/// One row per attempted move, plus a leading row for the initial state.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iteration: usize,
    pub e_g: f64,
    pub e_h: f64,
    pub changed_fraction: f64,
    pub active_count: usize,
    pub ms: f64,
    pub repaired_edges: usize,
}

/// Full record of a solver run.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    pub final_labeling: Labeling,
}

impl SolveTrace {
    pub fn final_energy(&self) -> f64 {
        self.rows.last().expect("trace has an initial row").e_g
    }

    /// Moves attempted (the initial row does not count).
    pub fn iterations(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn total_ms(&self) -> f64 {
        self.rows.iter().map(|r| r.ms).sum()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "iteration,E_g,E_h,changed_fraction,active_count,ms")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.6},{:.6},{:.6},{},{:.3}",
                r.iteration, r.e_g, r.e_h, r.changed_fraction, r.active_count, r.ms
            )?;
        }
        Ok(())
    }
}

struct TraceBuilder<'m> {
    model: &'m EnergyModel,
    rows: Vec<TraceRow>,
    x: Labeling,
    e: f64,
}

impl<'m> TraceBuilder<'m> {
    fn start(model: &'m EnergyModel, init: Labeling) -> Result<Self> {
        let e = model.energy(&init, PriorMode::G)?;
        let e_h = model.energy(&init, PriorMode::H)?;
        let rows = vec![TraceRow {
            iteration: 0,
            e_g: e,
            e_h,
            changed_fraction: 0.0,
            active_count: 0,
            ms: 0.0,
            repaired_edges: 0,
        }];
        Ok(TraceBuilder { model, rows, x: init, e })
    }

    /// Accepts `candidate` if it does not raise the true energy, records a
    /// row either way, and returns the energy decrease achieved.
    fn record(
        &mut self,
        candidate: Labeling,
        active_count: usize,
        repaired_edges: usize,
        started: Instant,
    ) -> Result<f64> {
        let cand_e = self.model.energy(&candidate, PriorMode::G)?;
        let (new_x, new_e) =
            if cand_e <= self.e { (candidate, cand_e) } else { (self.x.clone(), self.e) };
        let decrease = self.e - new_e;
        let row = TraceRow {
            iteration: self.rows.len(),
            e_g: new_e,
            e_h: self.model.energy(&new_x, PriorMode::H)?,
            changed_fraction: new_x.changed_fraction(&self.x),
            active_count,
            ms: started.elapsed().as_secs_f64() * 1e3,
            repaired_edges,
        };
        self.rows.push(row);
        self.x = new_x;
        self.e = new_e;
        Ok(decrease)
    }

    fn finish(self) -> SolveTrace {
        SolveTrace { rows: self.rows, final_labeling: self.x }
    }
}

/// Label pairs (alpha, beta) with 0 < beta - alpha <= T, lexicographic.
fn window_pairs(label_count: usize, trunc: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..label_count {
        for b in (a + 1)..label_count.min(a + trunc + 1) {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Runs a solver to convergence from `init`.
///
/// Sweep-based solvers stop once a full sweep decreases the energy by no
/// more than `tol`; the generalized swap stops after two consecutive
/// no-improvement moves (one per parity) and the full variant after one.
pub fn run(
    model: &EnergyModel,
    solver: Solver,
    init: &Labeling,
    opts: &SolveOptions,
) -> Result<SolveTrace> {
    if solver == Solver::GSwapFull && !model.prior().is_truncated_flat() {
        return Err(Error::Refused(format!(
            "gswapf requires a truncated-flat prior; '{}' keeps growing past its threshold",
            model.prior().kind().name()
        )));
    }
    model.energy(init, PriorMode::G)?; // validates the init labeling
    let mut tb = TraceBuilder::start(model, init.clone())?;
    let l = model.label_count();
    let trunc = model.prior().trunc();

    match solver {
        Solver::AlphaExpansion => {
            for _ in 0..opts.max_sweeps {
                let sweep_start = tb.e;
                for alpha in 0..l {
                    let t0 = Instant::now();
                    let out = alpha_expansion_move(model, &tb.x, alpha)?;
                    tb.record(out.labeling, model.node_count(), out.repaired_edges, t0)?;
                }
                if sweep_start - tb.e <= opts.tol {
                    break;
                }
            }
        }
        Solver::AlphaBetaSwap => {
            let pairs = window_pairs(l, trunc);
            for _ in 0..opts.max_sweeps {
                let sweep_start = tb.e;
                for &(a, b) in &pairs {
                    let t0 = Instant::now();
                    let active =
                        tb.x.as_slice().iter().filter(|&&xl| xl == a || xl == b).count();
                    let candidate = alphabeta_swap_move(model, &tb.x, a, b)?;
                    tb.record(candidate, active, 0, t0)?;
                }
                if sweep_start - tb.e <= opts.tol {
                    break;
                }
            }
        }
        Solver::RangeSwap | Solver::RangeSwapExtended => {
            let variant = match solver {
                Solver::RangeSwap => RangeMoveVariant::Standard,
                _ => RangeMoveVariant::Extended { epsilon: opts.epsilon },
            };
            let pairs = window_pairs(l, trunc);
            for _ in 0..opts.max_sweeps {
                let sweep_start = tb.e;
                for &(a, b) in &pairs {
                    let t0 = Instant::now();
                    let active =
                        tb.x.as_slice().iter().filter(|&&xl| xl >= a && xl <= b).count();
                    let candidate = range_swap_move(model, &tb.x, a, b, variant)?;
                    tb.record(candidate, active, 0, t0)?;
                }
                if sweep_start - tb.e <= opts.tol {
                    break;
                }
            }
        }
        Solver::GSwap => {
            let mut stale = 0usize;
            for t in 0..opts.max_sweeps {
                let t0 = Instant::now();
                let plan = gswap_plan(model, &tb.x, t % 2);
                let active = plan.active_count();
                let (candidate, _) = apply_plan(model, &tb.x, &plan)?;
                let decrease = tb.record(candidate, active, 0, t0)?;
                if decrease <= opts.tol {
                    stale += 1;
                    if stale >= 2 {
                        break;
                    }
                } else {
                    stale = 0;
                }
            }
        }
        Solver::GSwapFull => {
            for _ in 0..opts.max_sweeps {
                let t0 = Instant::now();
                let candidate = gswapf_move(model, &tb.x)?;
                let decrease = tb.record(candidate, model.node_count(), 0, t0)?;
                if decrease <= opts.tol {
                    break;
                }
            }
        }
    }
    Ok(tb.finish())
}
