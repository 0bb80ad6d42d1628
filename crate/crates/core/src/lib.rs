//! Best approximation onto intersections of closed convex sets by averaged alternating
//! modified reflections (AAMR), with the classical comparison methods and an experiment
//! harness for subspace problems.
//!
//! The AAMR operator for sets `A`, `B` and parameters `α ∈ (0,1]`, `β ∈ (0,1)` is
//!
//! ```text
//! T = (1 − α) I + α (2β P_B − I)(2β P_A − I)
//! ```
//!
//! and iterating `T_{A−q,B−q,α,β}` from any start makes `P_A(x_k + q)` converge to
//! `P_{A∩B}(q)` whenever the normal-cone constraint qualification holds at that point;
//! otherwise `‖x_k‖ → ∞`.
//!
//! ```
//! use aamr::sets::ConvexSet;
//! use aamr::solvers::{aamr_solve, Status, StoppingPolicy, TargetError};
//! use aamr::nalgebra::dvector;
//!
//! let a = ConvexSet::ball(dvector![1.0, 1.0], 1.0).unwrap();
//! let b = ConvexSet::ball(dvector![-1.0, 1.0], 1.0).unwrap();
//! let q = dvector![2.0, 1.0];
//! let policy = StoppingPolicy::true_error(TargetError::Point(dvector![0.0, 1.0]), 1e-4, 100_000);
//! let result = aamr_solve(&a, &b, &q, &q, 0.9, 0.7, &policy).unwrap();
//! assert_eq!(result.status, Status::Converged);
//! ```

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod sets;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::SubspacePair;
pub use operators::{
    AamrOperator, DrOperator, Operator, SolveResult, Status, StoppingPolicy, TargetError,
};
pub use sets::{ConvexSet, LinearSubspace, Vector};
pub use solvers::MethodSpec;

pub use nalgebra;
