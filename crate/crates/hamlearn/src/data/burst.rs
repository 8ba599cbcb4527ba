//! Burst generation with a fine-step RK4 reference solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::DomainBox;
use crate::error::{Error, Result};
use crate::phase::{HamiltonianSystem, StateVector, Trajectory};

use super::plan::BurstPlan;

/// `M` i.i.d. uniform initial states in the box, deterministic in the seed.
pub fn sample_initial_states(plan: &BurstPlan, domain: &DomainBox) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    (0..plan.trajectories)
        .map(|_| {
            StateVector::new(domain.sample_uniform(&mut rng))
                .expect("uniform draws from a finite box are finite")
        })
        .collect()
}

/// A burst that blew up during integration.
#[derive(Debug, Clone)]
pub struct DroppedBurst {
    pub index: usize,
    pub reason: String,
}

/// Generated bursts plus provenance: dropped trajectories and the indices of
/// bursts that left the sampling box (kept, recorded as-is).
#[derive(Debug, Clone)]
pub struct BurstBatch {
    pub bursts: Vec<Trajectory>,
    pub dropped: Vec<DroppedBurst>,
    pub exited_domain: Vec<usize>,
}

/// Integrate `M` bursts of `J + 1` samples at spacing `dt`, running the
/// reference solver at `dt / fine_ratio` and recording every
/// `fine_ratio`-th state.
pub fn generate_bursts(
    system: &HamiltonianSystem,
    plan: &BurstPlan,
    domain: &DomainBox,
) -> Result<BurstBatch> {
    if domain.dim() != system.dim() {
        return Err(Error::Dimension(format!(
            "domain dimension {} does not match system dimension {}",
            domain.dim(),
            system.dim()
        )));
    }
    let initial = sample_initial_states(plan, domain);
    let substep = plan.dt / plan.fine_ratio as f64;
    let rhs = system.rhs_fn();

    // Each burst is independent; the indexed collect keeps the output order
    // (and therefore every downstream result) independent of thread count.
    let results: Vec<std::result::Result<Trajectory, String>> = initial
        .par_iter()
        .map(|u0| {
            let rows = crate::phase::integrate_recorded_rows(
                &|u: &[f64], out: &mut [f64]| rhs(u, out),
                u0.values(),
                substep,
                plan.steps_per_burst,
                plan.fine_ratio as usize,
            )
            .map_err(|e| e.to_string())?;
            let times: Vec<f64> = (0..rows.len()).map(|j| j as f64 * plan.dt).collect();
            let states: std::result::Result<Vec<StateVector>, _> =
                rows.into_iter().map(StateVector::new).collect();
            let states = states.map_err(|e| e.to_string())?;
            Trajectory::new(times, states).map_err(|e| e.to_string())
        })
        .collect();

    let mut bursts = Vec::with_capacity(plan.trajectories);
    let mut dropped = Vec::new();
    let mut exited_domain = Vec::new();
    for (index, res) in results.into_iter().enumerate() {
        match res {
            Ok(traj) => {
                if traj
                    .states()
                    .iter()
                    .any(|s| !domain.contains(s.values(), 0.0))
                {
                    exited_domain.push(index);
                }
                bursts.push(traj);
            }
            Err(reason) => dropped.push(DroppedBurst { index, reason }),
        }
    }
    Ok(BurstBatch {
        bursts,
        dropped,
        exited_domain,
    })
}
