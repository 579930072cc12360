//! Exact desk-scale dynamics of induced systems.
//!
//! A finite system `(X, T)` induces the hyperspace system `(K(X), T_K)` on
//! nonempty subsets and the measure system `(M(X), T_M)` on probability
//! vectors. This crate computes both exactly, together with return-time
//! combinatorics, classification, and joinings of finite systems. The full
//! shift and the dyadic odometer are handled exactly at cylinder level.

pub mod catalog;
pub mod classify;
pub mod cylinder;
pub mod error;
pub mod hyperspace;
pub mod io;
pub mod joinings;
pub mod measures;
pub mod par;
pub mod recurrence;
pub mod sample;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
pub use par::Exec;
pub use system::{FactorMap, FiniteSystem, Metric};
