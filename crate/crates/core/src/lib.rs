//! Numerical laboratory for the extended-phase-space construction of a
//! quantum time observable.
//!
//! The crate is organised bottom-up:
//!
//! * [`classical`]: parametric Hamiltonian dynamics on the extended phase
//!   space, its constraint `H + S = 0`, Poisson brackets and a symplectic
//!   integrator.
//! * [`quantum`]: truncated system space, the discretised clock with its
//!   DFT-conjugate pair `(T, S)`, the extended Hamiltonian and its evolution.
//! * [`constraint`]: the physical-event subspace (kernel of the extended
//!   Hamiltonian), computed by spectral matching and by direct
//!   diagonalisation.
//! * [`time_observable`]: the time POVM on the physical subspace together with
//!   audits of positivity, completeness, non-orthogonality, conditional
//!   dynamics and covariance.
//! * [`scenario`]: config-driven scenario runner and report emission used by
//!   the `phystime` binary.
//!
//! Units are `ħ = 1` throughout. Extended-space vectors use system-major
//! ordering: `index = system_index * M + clock_index`.

pub mod classical;
pub mod constraint;
mod error;
pub mod linalg;
pub mod quantum;
pub mod scenario;
pub mod serial;
pub mod time_observable;

pub use error::{Error, Result};
