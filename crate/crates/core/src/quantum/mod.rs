//! Extended quantum system `H_ex = H_s ⊗ I + σ · I ⊗ S` on a truncated
//! system space and a discretised clock.

mod clock;
mod extended;
pub mod models;
mod system;

pub use clock::{build_clock, commutator_residual, ClockSpace, Sign};
pub use extended::{
    build_extended, evolve_extended, evolve_factored, evolve_kronecker, uncertainty_product, ExtendedSpace,
    ExtendedState, Uncertainty,
};
pub use system::{build_system_space, SnapRecord, SystemSpace};
