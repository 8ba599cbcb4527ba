//! Declarative descriptions of the synthetic data generation stages.

use crate::error::{Error, Result};

/// Reference-solver substep factor: the paper generates data with a solver
/// step of `1e-4 * dt`.
pub const DEFAULT_FINE_RATIO: u32 = 10_000;

/// Plan for a batch of short trajectories ("bursts").
#[derive(Debug, Clone)]
pub struct BurstPlan {
    /// Number of trajectories `M`.
    pub trajectories: usize,
    /// Intervals per burst `J` (so `J + 1` samples each).
    pub steps_per_burst: usize,
    /// Observation spacing `dt`.
    pub dt: f64,
    /// The reference solver runs at `dt / fine_ratio`.
    pub fine_ratio: u32,
    /// RNG seed for the initial states.
    pub seed: u64,
}

impl BurstPlan {
    pub fn new(trajectories: usize, steps_per_burst: usize, dt: f64, seed: u64) -> Result<Self> {
        if trajectories == 0 || steps_per_burst == 0 {
            return Err(Error::Argument(
                "burst plan needs at least one trajectory and one step".into(),
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Argument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            trajectories,
            steps_per_burst,
            dt,
            fine_ratio: DEFAULT_FINE_RATIO,
            seed,
        })
    }

    pub fn with_fine_ratio(mut self, fine_ratio: u32) -> Result<Self> {
        if fine_ratio == 0 {
            return Err(Error::Argument("fine_ratio must be positive".into()));
        }
        self.fine_ratio = fine_ratio;
        Ok(self)
    }
}

/// Observation noise model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Every entry is scaled by `1 + eta` with `eta` uniform in
    /// `[-amplitude, amplitude]`.
    MultiplicativeUniform,
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub kind: NoiseKind,
}

impl NoiseSpec {
    pub fn multiplicative(amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::Argument(format!(
                "noise amplitude must be non-negative, got {amplitude}"
            )));
        }
        Ok(Self {
            amplitude,
            kind: NoiseKind::MultiplicativeUniform,
        })
    }
}

/// Per-burst polynomial de-noising configuration.
#[derive(Debug, Clone, Copy)]
pub struct DenoiseConfig {
    /// Fit degree `Q`, `1 <= Q <= steps_per_burst`.
    pub degree: usize,
    /// Replace the states by the fitted values (the de-noising filter).
    pub apply_filter: bool,
}

impl DenoiseConfig {
    pub fn new(degree: usize, apply_filter: bool) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Argument("de-noising degree must be at least 1".into()));
        }
        Ok(Self {
            degree,
            apply_filter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_validate_their_counts() {
        assert!(BurstPlan::new(0, 2, 0.1, 1).is_err());
        assert!(BurstPlan::new(2, 0, 0.1, 1).is_err());
        assert!(BurstPlan::new(2, 2, 0.0, 1).is_err());
        assert!(BurstPlan::new(2, 2, -0.5, 1).is_err());
        let plan = BurstPlan::new(2, 2, 0.1, 1).unwrap();
        assert_eq!(plan.fine_ratio, DEFAULT_FINE_RATIO);
        assert!(plan.with_fine_ratio(0).is_err());
    }

    #[test]
    fn noise_amplitude_must_be_nonnegative() {
        assert!(NoiseSpec::multiplicative(-0.1).is_err());
        assert!(NoiseSpec::multiplicative(f64::NAN).is_err());
        assert!(NoiseSpec::multiplicative(0.0).is_ok());
    }

    #[test]
    fn denoise_degree_positive() {
        assert!(DenoiseConfig::new(0, true).is_err());
        assert!(DenoiseConfig::new(5, false).is_ok());
    }
}
