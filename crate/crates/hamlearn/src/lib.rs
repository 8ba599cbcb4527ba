//! Learning Hamiltonian systems from trajectory data.
//!
//! The library fits an unknown Hamiltonian `H` by least squares over the
//! gradient space of a total-degree polynomial basis: given data pairs
//! `(x_k, xdot_k)` it minimizes `sum_k || J xdot_k - grad h(x_k) ||^2` over
//! `h` in the basis span. The recovered system `du/dt = J^{-1} grad H~(u)`
//! conserves the learned Hamiltonian `H~` exactly along its flow, which is
//! the structure-preserving property the whole pipeline is built around.
//!
//! Modules:
//! - [`phase`]: phase-space state, the symplectic matrix action, RK4
//!   integration and the built-in benchmark systems.
//! - [`basis`]: multi-index sets, tensor Legendre bases on a hypercube,
//!   gradient evaluation and stability diagnostics.
//! - [`data`]: synthetic burst generation, noise injection, numerical
//!   differentiation / polynomial de-noising and pair assembly.
//! - [`learner`]: the gradient least-squares problem, the learned model and
//!   its induced system, the non-structure-preserving baseline, and the
//!   error/stability diagnostics.

pub mod basis;
pub mod data;
mod error;
pub mod learner;
pub mod phase;

pub use error::{Error, Result};
pub use basis::{
    check_stability, enumerate_indices, kn_estimate, kn_estimate_at, legendre_eval_with_deriv,
    DomainBox, DomainPolicy, MultiIndex, StabilityDiagnostic, TotalDegreeBasis,
};
pub use data::{
    add_noise, assemble_pairs, central_diff, generate_bursts, lsfit_denoise, read_pairs,
    read_trajectories, sample_initial_states, write_pairs, write_trajectories, BurstBatch,
    BurstPlan, DataPairSet, DenoiseConfig, DerivativeMethod, NoiseKind, NoiseSpec,
};
pub use learner::{
    a_deviation, alignment_error, assemble, best_approx_error, fit_nonsp, read_model, solve,
    symplectic_defect, truncate_tl, write_model, AlignmentResult, DiagnosticsReport,
    GradientLSProblem, HamiltonianModel, NonSpModel, SolverReport, DEFAULT_SOLVE_REL_TOL,
};
pub use phase::{
    apply_j, apply_j_inverse, builtin_system, hamiltonian_deviation, integrate, rk4_step,
    HamiltonianSystem, IntegratorConfig, Scheme, StateVector, Trajectory, BUILTIN_NAMES,
};
