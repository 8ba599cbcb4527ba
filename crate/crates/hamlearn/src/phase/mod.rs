//! Phase-space types, the symplectic matrix action, RK4 integration and the
//! built-in benchmark Hamiltonian systems.

mod integrator;
mod state;
mod systems;

pub use integrator::{
    hamiltonian_deviation, integrate, rk4_step, IntegratorConfig, Scheme, Trajectory,
};
pub(crate) use integrator::integrate_recorded_rows;
pub use state::{apply_j, apply_j_inverse, StateVector};
pub(crate) use state::{apply_j_into, apply_j_inverse_into};
pub use systems::{builtin_system, HamiltonianSystem, BUILTIN_NAMES};
