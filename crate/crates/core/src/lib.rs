//! Weighted set packing through near-Boolean optimization.
//!
//! Every element of the ground set distributes a unit of membership over the
//! feasible sets containing it. The resulting fuzzy cover is scored by the
//! multilinear extension of the weight function, and the local searches in
//! [`solvers`] move through fuzzy covers until they land on a partition of
//! the ground set, from which the packing is read off.

pub mod approx;
pub mod cover;
mod error;
pub mod games;
pub mod generate;
pub mod io;
pub mod oracle;
pub mod setfn;
pub mod solvers;

pub use cover::{MembershipProfile, Partition};
pub use error::{Error, Result};
pub use setfn::{CostFunction, Family, Mode, SetFunction, Subset, DEFAULT_TOLERANCE};
pub use solvers::{SolveResult, SolverConfig};
