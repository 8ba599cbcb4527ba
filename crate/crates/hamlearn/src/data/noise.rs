//! Multiplicative observation noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::phase::{StateVector, Trajectory};

use super::plan::{NoiseKind, NoiseSpec};

/// Scale every state entry by `1 + eta`, `eta` i.i.d. uniform in
/// `[-amplitude, amplitude]`. Amplitude zero returns the input unchanged.
pub fn add_noise(traj: &Trajectory, spec: &NoiseSpec, seed: u64) -> Trajectory {
    let NoiseKind::MultiplicativeUniform = spec.kind;
    if spec.amplitude == 0.0 {
        return traj.clone();
    }
    let a = spec.amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<StateVector> = traj
        .states()
        .iter()
        .map(|s| {
            let values: Vec<f64> = s
                .values()
                .iter()
                .map(|&x| x * (1.0 + rng.random_range(-a..a)))
                .collect();
            StateVector::new(values).expect("finite noise keeps entries finite")
        })
        .collect();
    Trajectory::new(traj.times().to_vec(), states)
        .expect("noising preserves the trajectory shape")
}
