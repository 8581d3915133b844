//! Linearized Bregman solvers for basis pursuit and matrix completion, with
//! an accelerated variant and machine-checkable convergence certificates.
//!
//! The solvers minimize `|x|_1 + (1/(2 mu)) |x|^2` subject to `A x = b` (or
//! the nuclear-norm analogue subject to agreement with observed entries) by
//! gradient descent on the smooth dual. The accelerated variant extrapolates
//! the dual iterates and improves the objective-gap decay from `O(1/k)` to
//! `O(1/k^2)`; for large enough `mu` the minimizer coincides with the plain
//! l1 (or nuclear-norm) solution.
//!
//! Start with the `examples/` directory: each example exercises one
//! capability end to end. The important entry points are
//! [`problems::gen_bp`] / [`problems::gen_mc`] for reproducible instances,
//! [`solvers::run`] for a traced solve, and
//! [`diagnostics::check_lb_rate`] / [`diagnostics::check_alb_rate`] for the
//! rate certificates.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod problems;
pub mod prox;
pub mod solvers;

pub use error::Error;
pub use linalg::{DenseMatrix, RngStream};
pub use problems::{BasisPursuitProblem, MatrixCompletionProblem, ProblemInstance};
pub use prox::ObjectiveKind;
pub use solvers::{ScheduleKind, SolverConfig, Variant};
