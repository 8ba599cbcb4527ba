//! Config-driven harness that regenerates the benchmark studies end to end:
//! data generation, noise, de-noising, the gradient least-squares fit, the
//! non-structure-preserving baseline, and the plot-ready output files.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::{
    BaselineFlags, DenoiseSettings, DerivativeMethodName, ExperimentConfig, RunError,
};
pub use presets::{preset, preset_names};
pub use report::{emit_comparison, emit_convergence, emit_outputs, ConvergenceStudy, ExperimentReport};
pub use runner::{run_convergence_study, run_experiment, run_nonsp_comparison, ComparisonReport};
