//! Classical parametric dynamics on the extended phase space.
//!
//! The original system lives on `R^{2n}` with canonical coordinates
//! `(q, p)`. The extended system adds the pair `(T, S)` (time and its
//! conjugate momentum) and evolves in an auxiliary parameter `θ` under
//! `H_ex = H(q, p) + S`. On the constraint surface `H_ex = 0` the two
//! formulations describe the same motion, with `dT/dθ = 1` and `S = -H`.

mod bracket;
mod integrate;
mod state;
mod system;
mod trajectory;

pub use bracket::{clock_bracket_defect, poisson_bracket, FiniteDifference};
pub use integrate::{
    check_equivalence, integrate_extended, integrate_original, EquivalenceReport, MIDPOINT_MAX_ITERATIONS,
    MIDPOINT_TOLERANCE,
};
pub use state::{ExtendedPhaseState, PhaseState};
pub use system::{
    check_gradient, eval_extended_hamiltonian, extend_state, ExtendedSystem, FreeParticle, Hamiltonian,
    HarmonicOscillator, QuarticOscillator,
};
pub use trajectory::{CsvRecord, Trajectory};
