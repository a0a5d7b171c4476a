//! Exact linear algebra and linear programming over [`Q`](crate::Q).

pub mod linalg;
pub mod lp;

pub use linalg::{
    in_span, orthogonal_projection, rank, rref, solve_linear_system, span_coefficients, Projection,
};
pub use lp::{solve_lp, FarkasCertificate, LinearProgram, LpSolution, LpStatus, Optimum, UnboundedRay};
