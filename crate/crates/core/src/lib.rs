//! Multi-label MRF energy minimization by graph-cut move-making.
//!
//! The crate provides the energy model ([`energy`]), truncated-convex
//! priors with their convex surrogates ([`priors`]), an exact layered
//! min-cut subproblem solver ([`ishikawa`]) on top of an augmenting-path
//! max-flow core ([`maxflow`]), six move-making solvers ([`moves`]), a
//! brute-force oracle for small instances ([`oracle`]), and a stereo
//! benchmark harness ([`stereo`], [`synth`], [`instance`]).

pub mod energy;
pub mod error;
pub mod instance;
pub mod ishikawa;
pub mod maxflow;
pub mod moves;
pub mod oracle;
pub mod pgm;
pub mod priors;
pub mod stereo;
pub mod synth;

pub use energy::{EnergyModel, GraphTopology, LabelSpace, Labeling, PriorMode, UnaryTable};
pub use error::{Error, Result};
pub use moves::{run, SolveOptions, SolveTrace, Solver};
pub use priors::{Prior, PriorKind};
