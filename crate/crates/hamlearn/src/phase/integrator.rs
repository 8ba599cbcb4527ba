//! Classical fourth-order Runge-Kutta stepping and trajectory bookkeeping.

use crate::error::{Error, Result};

use super::state::StateVector;

/// Time-stepping scheme. RK4 is the only scheme in scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
}

/// Fixed-step integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub step: f64,
    pub scheme: Scheme,
}

impl IntegratorConfig {
    pub fn new(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Argument(format!("step must be positive, got {step}")));
        }
        Ok(Self {
            step,
            scheme: Scheme::Rk4,
        })
    }
}

/// A discretely sampled solution curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StateVector>,
    origin: StateVector,
}

impl Trajectory {
    /// Build from matching time/state lists; times must be strictly
    /// increasing and the first state becomes the origin.
    pub fn new(times: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::Dimension(format!(
                "times ({}) and states ({}) must be non-empty and equal in length",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::Dimension(
                "all trajectory states must share one dimension".into(),
            ));
        }
        let origin = states[0].clone();
        Ok(Self {
            times,
            states,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one sample
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn origin(&self) -> &StateVector {
        &self.origin
    }

    pub fn dim(&self) -> usize {
        self.origin.dim()
    }
}

pub(crate) struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One RK4 step on raw slices. On a non-finite stage evaluation returns the
/// in-step time offset of the failing stage.
pub(crate) fn rk4_step_raw<F: Fn(&[f64], &mut [f64])>(
    rhs: &F,
    u: &[f64],
    step: f64,
    s: &mut Rk4Scratch,
    out: &mut [f64],
) -> std::result::Result<(), f64> {
    let n = u.len();
    let h = step;

    rhs(u, &mut s.k1);
    if !all_finite(&s.k1) {
        return Err(0.0);
    }
    for i in 0..n {
        s.tmp[i] = u[i] + 0.5 * h * s.k1[i];
    }
    rhs(&s.tmp, &mut s.k2);
    if !all_finite(&s.k2) {
        return Err(0.5 * h);
    }
    for i in 0..n {
        s.tmp[i] = u[i] + 0.5 * h * s.k2[i];
    }
    rhs(&s.tmp, &mut s.k3);
    if !all_finite(&s.k3) {
        return Err(0.5 * h);
    }
    for i in 0..n {
        s.tmp[i] = u[i] + h * s.k3[i];
    }
    rhs(&s.tmp, &mut s.k4);
    if !all_finite(&s.k4) {
        return Err(h);
    }
    for i in 0..n {
        out[i] = u[i] + h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
    if !all_finite(out) {
        return Err(h);
    }
    Ok(())
}

/// One classical RK4 step of size `step` for the autonomous field `rhs`.
pub fn rk4_step<F>(rhs: F, u: &StateVector, step: f64) -> Result<StateVector>
where
    F: Fn(&[f64], &mut [f64]),
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    let mut scratch = Rk4Scratch::new(u.dim());
    let mut out = vec![0.0; u.dim()];
    rk4_step_raw(&rhs, u.values(), step, &mut scratch, &mut out).map_err(|offset| {
        Error::Integration {
            time: offset,
            step: 0,
            reason: "non-finite stage evaluation".into(),
        }
    })?;
    StateVector::new(out)
}

fn step_count(step: f64, horizon: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::Argument(format!(
            "horizon must be non-negative, got {horizon}"
        )));
    }
    // Smallest n with n*step >= horizon - step/2.
    let n = (horizon / step - 0.5).ceil();
    if n > 1e15 {
        return Err(Error::Capacity(format!(
            "horizon/step implies {n} steps, refusing"
        )));
    }
    Ok(n.max(0.0) as usize)
}

/// Integrate `rhs` from `u0` on the uniform grid `0, step, 2 step, ...` until
/// the final time reaches at least `horizon - step/2`.
pub fn integrate<F>(rhs: F, u0: &StateVector, step: f64, horizon: f64) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n_steps = step_count(step, horizon)?;
    let dim = u0.dim();
    let mut scratch = Rk4Scratch::new(dim);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut current = u0.values().to_vec();
    let mut next = vec![0.0; dim];
    states.push(u0.clone());
    times.push(0.0);
    for j in 0..n_steps {
        rk4_step_raw(&rhs, &current, step, &mut scratch, &mut next).map_err(|offset| {
            Error::Integration {
                time: j as f64 * step + offset,
                step: j,
                reason: "non-finite stage evaluation".into(),
            }
        })?;
        std::mem::swap(&mut current, &mut next);
        times.push((j + 1) as f64 * step);
        states.push(StateVector::new(current.clone())?);
    }
    Trajectory::new(times, states)
}

/// Fine-step integration recording every `every`-th state; returns
/// `records + 1` raw rows (the initial state included). Used by burst
/// generation where the reference solver runs far below the observation
/// spacing.
pub(crate) fn integrate_recorded_rows<F>(
    rhs: &F,
    u0: &[f64],
    substep: f64,
    records: usize,
    every: usize,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = u0.len();
    let mut scratch = Rk4Scratch::new(dim);
    let mut rows = Vec::with_capacity(records + 1);
    rows.push(u0.to_vec());
    let mut current = u0.to_vec();
    let mut next = vec![0.0; dim];
    for fine in 0..records * every {
        rk4_step_raw(rhs, &current, substep, &mut scratch, &mut next).map_err(|offset| {
            Error::Integration {
                time: fine as f64 * substep + offset,
                step: fine,
                reason: "non-finite stage evaluation".into(),
            }
        })?;
        std::mem::swap(&mut current, &mut next);
        if (fine + 1) % every == 0 {
            rows.push(current.clone());
        }
    }
    Ok(rows)
}

/// Hamiltonian deviation `dH(t) = h(u(t)) - h(u(0))` along a trajectory;
/// the first entry is exactly zero.
pub fn hamiltonian_deviation<F>(traj: &Trajectory, h: F) -> Vec<(f64, f64)>
where
    F: Fn(&StateVector) -> f64,
{
    let h0 = h(&traj.states()[0]);
    traj.times()
        .iter()
        .zip(traj.states())
        .map(|(&t, s)| (t, h(s) - h0))
        .collect()
}
