//! The phase-space state `u = (p^T, q^T)^T` and the symplectic matrix action.

use crate::error::{Error, Result};

/// Point in phase space `R^{2d}`: the first `d` entries are the momenta `p`,
/// the last `d` entries the positions `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    values: Vec<f64>,
    dim_d: usize,
}

impl StateVector {
    /// Build a state from `2d` finite values (p-block then q-block).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "state length must be a positive even number, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "non-finite state entry {bad}: {}",
                values[bad]
            )));
        }
        let dim_d = values.len() / 2;
        Ok(Self { values, dim_d })
    }

    /// Number of degrees of freedom `d`.
    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    /// Full phase-space dimension `2d`.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// All entries, p-block first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Momentum block `p`.
    pub fn momenta(&self) -> &[f64] {
        &self.values[..self.dim_d]
    }

    /// Position block `q`.
    pub fn positions(&self) -> &[f64] {
        &self.values[self.dim_d..]
    }
}

impl AsRef<[f64]> for StateVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn check_even(len: usize) -> Result<usize> {
    if len == 0 || len % 2 != 0 {
        return Err(Error::Dimension(format!(
            "expected a 2d-vector, got length {len}"
        )));
    }
    Ok(len / 2)
}

/// Apply the symplectic matrix `J = [[0, I], [-I, 0]]` in (p, q) block order.
///
/// For a time derivative `xdot = (pdot, qdot)` the product `J xdot =
/// (qdot, -pdot)` approximates `grad H(x)` since `xdot = J^{-1} grad H`.
pub fn apply_j(xdot: &[f64]) -> Result<Vec<f64>> {
    let d = check_even(xdot.len())?;
    let mut out = Vec::with_capacity(xdot.len());
    out.extend_from_slice(&xdot[d..]);
    out.extend(xdot[..d].iter().map(|v| -v));
    Ok(out)
}

/// Apply `J^{-1} = -J`: maps a gradient `(dH/dp, dH/dq)` to the
/// right-hand-side `(-dH/dq, dH/dp)` of the Hamiltonian system.
pub fn apply_j_inverse(grad: &[f64]) -> Result<Vec<f64>> {
    let d = check_even(grad.len())?;
    let mut out = Vec::with_capacity(grad.len());
    out.extend(grad[d..].iter().map(|v| -v));
    out.extend_from_slice(&grad[..d]);
    Ok(out)
}

/// In-place variants used by inner loops; `out` must have the input's length.
pub(crate) fn apply_j_into(xdot: &[f64], out: &mut [f64]) {
    let d = xdot.len() / 2;
    for i in 0..d {
        out[i] = xdot[d + i];
        out[d + i] = -xdot[i];
    }
}

pub(crate) fn apply_j_inverse_into(grad: &[f64], out: &mut [f64]) {
    let d = grad.len() / 2;
    for i in 0..d {
        out[i] = -grad[d + i];
        out[d + i] = grad[i];
    }
}
