//! Synthetic trajectory bursts, noise injection, time-derivative estimation
//! and assembly of the least-squares data pairs.

mod burst;
mod derivative;
mod files;
mod noise;
mod pairs;
mod plan;

pub use burst::{generate_bursts, sample_initial_states, BurstBatch, DroppedBurst};
pub use derivative::{central_diff, lsfit_denoise};
pub use files::{read_pairs, read_trajectories, write_pairs, write_trajectories};
pub use noise::add_noise;
pub use pairs::{assemble_pairs, DataPairSet, DerivativeMethod, PairProvenance};
pub use plan::{BurstPlan, DenoiseConfig, NoiseKind, NoiseSpec, DEFAULT_FINE_RATIO};
