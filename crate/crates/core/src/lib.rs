//! Sparse interior-point solver for discrete optimal transport.
//!
//! The transport LP `min cᵀp s.t. Ap = [a; b], p ≥ 0` is solved on a small,
//! adaptively priced subset of the variables (the *support*). Each Newton
//! step reduces to a Schur complement of size `min(m, n)`, handled first by
//! incomplete-Cholesky PCG and, once the support settles, by a sparse exact
//! `LDLᵀ` factorization.

pub mod error;
pub mod graphcheck;
pub mod instance;
pub mod ipm;
pub mod kron;
pub mod linsolve;
pub mod oracle;
pub mod schur;
pub mod sparse;
pub mod support;

#[cfg(test)]
mod testutil;

pub use error::{OtError, Result};
pub use instance::{CostSpec, GridMetric, Metric, OtInstance};
pub use ipm::{solve, SolveReport, SolveStatus, SolverConfig, TransportPlan};
pub use oracle::{reference_solve, rwe, ReferenceSolution};
