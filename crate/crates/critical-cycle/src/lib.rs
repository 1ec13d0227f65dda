//! Finite-time cyclic driving of a bosonic mode across its mean-field
//! critical point: squeezing generation, two-point-measurement work
//! statistics, the coherence share of entropy production, and two
//! independent cross-checks (truncated Fock propagation and the
//! free-fermion Ising chain).

pub mod cli;
pub mod closed_forms;
pub mod coherence;
pub mod error;
pub mod fits;
pub mod fock;
pub mod gaussian;
pub mod ising;
pub mod ode;
pub mod protocol;
pub mod special;
pub mod work_statistics;

pub use error::{Error, Result};
