//! Profitability of two-option mechanisms.
//!
//! A mechanism is profitable when it is IC and strictly beats the best
//! constant decision, i.e. `E_π[v·x] > 0` for the normalized objective.
//! The submodules answer that question in four independent ways:
//!
//! * [`additivity`]: project `w = vπ` onto the subspace spanned by
//!   conditional-belief sections; a nonzero residual means profit is possible.
//! * [`construct`]: turn a nonzero residual into an explicit mechanism.
//! * [`transport`]: the constrained optimal-transport value.
//! * [`myo`]: under independence with square type spaces, the best
//!   match-your-opponent mechanism.
//!
//! [`decompose`] writes an IC mechanism under independence as a conic
//! combination of transportation-polytope extreme points.

pub mod additivity;
pub mod construct;
pub mod decompose;
pub mod myo;
pub mod transport;

pub use additivity::{additivity_test, AdditivityReport};
pub use construct::{construct_profitable, ConstructionOutcome, ConstructionReport, ConstructionResult};
pub use decompose::{decompose, is_acyclic_support, Decomposition, DecompositionTerm};
pub use myo::{match_your_opponent, MyoReport};
pub use transport::{orthogonal, transport_criterion, OrthogonalityReport, TransportResult};
