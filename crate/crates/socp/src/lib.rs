//! Dense second-order cone programming.
//!
//! A [`ConeProgram`] is stored in the user-facing form
//!
//! ```text
//! maximize    objᵀx
//! subject to  row·x ≤ rhs                 (linear inequalities)
//!             ‖A·x + b‖₂ ≤ cᵀx + d        (second-order cone blocks)
//! ```
//!
//! and solved by a homogeneous self-dual primal-dual interior-point method
//! with Nesterov–Todd scaling and Mehrotra predictor-corrector steps
//! ([`solve`]). Solutions can be re-checked against the original data with
//! [`certify`].

mod certify;
mod cones;
mod equilibrate;
mod program;
mod solver;

pub use certify::{certify, Certificate};
pub use program::{ConeProgram, ConstraintRef, LinearIneq, ProgramError, SocBlock};
pub use solver::{solve, ConeSolution, SolveStatus, SolverOptions};
