//! The gradient-space least-squares learner and its diagnostics.

mod diagnostics;
mod model;
mod model_io;
mod nonsp;
mod problem;

pub use diagnostics::{
    a_deviation, alignment_error, best_approx_error, symplectic_defect, truncate_tl,
    AlignmentResult, DiagnosticsReport,
};
pub use model::HamiltonianModel;
pub use model_io::{read_model, write_model};
pub use nonsp::{fit_nonsp, NonSpModel};
pub use problem::{assemble, solve, GradientLSProblem, SolverReport, DEFAULT_SOLVE_REL_TOL};
