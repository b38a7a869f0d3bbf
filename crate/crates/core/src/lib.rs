//! Ideal formulations of combinatorial disjunctive constraints, a
//! branch-and-bound engine with custom branching schemes, and exact oracles.

pub mod branching;
pub mod cdc;
pub mod encodings;
pub mod error;
pub mod formulation;
pub mod lp;
pub mod numerics;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use numerics::{int, rat, RatMatrix, RatVector, Rational};
