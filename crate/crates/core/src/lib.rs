//! Exact analysis of two-option and allocation mechanisms without transfers.
//!
//! Every probability, payoff and mechanism value is an exact rational
//! ([`Q`]). Incentive compatibility, spanning, additivity and profitability
//! verdicts are therefore exact equalities rather than tolerance checks, and
//! every verdict can be cross-checked against [`oracle::solve_principal`],
//! which solves the principal's problem directly as a linear program.
//!
//! Module map:
//!
//! * [`model`]: type spaces, joint distributions, mechanisms, objectives.
//! * [`numerics`]: exact Gaussian elimination, projections and a simplex solver.
//! * [`game`]: the auxiliary zero-sum game and its obedience constraints.
//! * [`ic`]: incentive-compatibility characterizations and the spanning preorder.
//! * [`profit`]: additivity, explicit profitable mechanisms, the transport
//!   criterion, extreme-point decomposition and match-your-opponent analysis.
//! * [`nalloc`]: the n-agent allocation problem with and without disposal.
//! * [`oracle`]: direct LP solutions and deterministic instance generation.
//! * [`io`]: the JSON instance and mechanism schema.

pub mod error;
pub mod fixtures;
pub mod game;
pub mod ic;
pub mod io;
pub mod model;
pub mod nalloc;
pub mod numerics;
pub mod oracle;
pub mod profit;
pub mod rational;

pub use error::{Error, Result};
pub use model::{Instance, JointDist, Mechanism, Objective, TypeSpace};
pub use rational::Q;
