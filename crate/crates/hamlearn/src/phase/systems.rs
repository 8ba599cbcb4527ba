//! The benchmark Hamiltonian systems with analytic right-hand sides.

use std::fmt;
use std::sync::Arc;

use crate::basis::DomainBox;
use crate::error::{Error, Result};

use super::integrator::{integrate, Trajectory};
use super::state::StateVector;

/// Shared scalar function of the phase-space point.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Shared vector field writing into a caller-provided buffer.
pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A Hamiltonian system: the energy `H` and the induced field
/// `rhs = J^{-1} grad H`.
#[derive(Clone)]
pub struct HamiltonianSystem {
    name: String,
    dim_d: usize,
    hamiltonian: ScalarField,
    rhs: VectorField,
    default_domain: DomainBox,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("name", &self.name)
            .field("dim_d", &self.dim_d)
            .field("default_domain", &self.default_domain)
            .finish()
    }
}

impl HamiltonianSystem {
    pub fn new<H, F>(
        name: impl Into<String>,
        dim_d: usize,
        default_domain: DomainBox,
        hamiltonian: H,
        rhs: F,
    ) -> Result<Self>
    where
        H: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if default_domain.dim() != 2 * dim_d {
            return Err(Error::Dimension(format!(
                "domain dimension {} does not match 2d = {}",
                default_domain.dim(),
                2 * dim_d
            )));
        }
        Ok(Self {
            name: name.into(),
            dim_d,
            hamiltonian: Arc::new(hamiltonian),
            rhs: Arc::new(rhs),
            default_domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn dim(&self) -> usize {
        2 * self.dim_d
    }

    pub fn default_domain(&self) -> &DomainBox {
        &self.default_domain
    }

    pub fn hamiltonian(&self, u: &StateVector) -> Result<f64> {
        self.check_dim(u)?;
        Ok((self.hamiltonian)(u.values()))
    }

    /// `H` on a raw slice; the caller guarantees the length.
    pub fn hamiltonian_raw(&self, u: &[f64]) -> f64 {
        (self.hamiltonian)(u)
    }

    pub fn rhs(&self, u: &StateVector) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        let mut out = vec![0.0; u.dim()];
        (self.rhs)(u.values(), &mut out);
        Ok(out)
    }

    /// `rhs` on raw slices; the caller guarantees the lengths.
    pub fn rhs_into(&self, u: &[f64], out: &mut [f64]) {
        (self.rhs)(u, out)
    }

    /// Clone of the field closure, handy for the integrators.
    pub fn rhs_fn(&self) -> VectorField {
        Arc::clone(&self.rhs)
    }

    /// Integrate this system with fixed-step RK4.
    pub fn integrate(&self, u0: &StateVector, step: f64, horizon: f64) -> Result<Trajectory> {
        self.check_dim(u0)?;
        let rhs = Arc::clone(&self.rhs);
        integrate(move |u, out| rhs(u, out), u0, step, horizon)
    }

    fn check_dim(&self, u: &StateVector) -> Result<()> {
        if u.dim() != 2 * self.dim_d {
            return Err(Error::Dimension(format!(
                "state dimension {} does not match system dimension {}",
                u.dim(),
                2 * self.dim_d
            )));
        }
        Ok(())
    }
}

/// Names accepted by [`builtin_system`].
pub const BUILTIN_NAMES: [&str; 5] = [
    "pendulum",
    "exp_quartic",
    "henon_heiles",
    "cherry",
    "double_pendulum",
];

/// Look up a benchmark system with its standard parameters and domain.
pub fn builtin_system(name: &str) -> Result<HamiltonianSystem> {
    match name {
        "pendulum" => pendulum(),
        "exp_quartic" => exp_quartic(),
        "henon_heiles" => henon_heiles(),
        "cherry" => cherry(),
        "double_pendulum" => double_pendulum(),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

/// Ideal single pendulum, unit mass: `H = p^2/(2 l^2) + g l (1 - cos q)`.
fn pendulum() -> Result<HamiltonianSystem> {
    const L: f64 = 1.0;
    const G: f64 = 9.8;
    use std::f64::consts::PI;
    let domain = DomainBox::new(vec![-2.0 * PI, -PI], vec![2.0 * PI, PI])?;
    HamiltonianSystem::new(
        "pendulum",
        1,
        domain,
        |u| u[0] * u[0] / (2.0 * L * L) + G * L * (1.0 - u[1].cos()),
        |u, out| {
            out[0] = -G * L * u[1].sin();
            out[1] = u[0] / (L * L);
        },
    )
}

/// `H = exp(-a1 p^2 - a2 q^4)` with `a1 = 1`, `a2 = 1.1`.
fn exp_quartic() -> Result<HamiltonianSystem> {
    const A1: f64 = 1.0;
    const A2: f64 = 1.1;
    let domain = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])?;
    HamiltonianSystem::new(
        "exp_quartic",
        1,
        domain,
        |u| (-A1 * u[0] * u[0] - A2 * u[1].powi(4)).exp(),
        |u, out| {
            let e = (-A1 * u[0] * u[0] - A2 * u[1].powi(4)).exp();
            out[0] = 4.0 * A2 * u[1].powi(3) * e;
            out[1] = -2.0 * A1 * u[0] * e;
        },
    )
}

/// Henon-Heiles galactic-motion system on `[-1, 1]^4`.
fn henon_heiles() -> Result<HamiltonianSystem> {
    let domain = DomainBox::new(vec![-1.0; 4], vec![1.0; 4])?;
    HamiltonianSystem::new(
        "henon_heiles",
        2,
        domain,
        |u| {
            let (p1, p2, q1, q2) = (u[0], u[1], u[2], u[3]);
            0.5 * (p1 * p1 + p2 * p2)
                + 0.5 * (q1 * q1 + q2 * q2)
                + q1 * q1 * q2
                - q2 * q2 * q2 / 3.0
        },
        |u, out| {
            let (p1, p2, q1, q2) = (u[0], u[1], u[2], u[3]);
            out[0] = -q1 - 2.0 * q1 * q2;
            out[1] = -q2 - q1 * q1 + q2 * q2;
            out[2] = p1;
            out[3] = p2;
        },
    )
}

/// Cherry's system, a classic example with an indefinite Hamiltonian.
fn cherry() -> Result<HamiltonianSystem> {
    let domain = DomainBox::new(vec![-2.0, -1.0, -2.0, -1.0], vec![2.0, 2.0, 1.0, 1.0])?;
    HamiltonianSystem::new(
        "cherry",
        2,
        domain,
        |u| {
            let (p1, p2, q1, q2) = (u[0], u[1], u[2], u[3]);
            0.5 * (q1 * q1 + p1 * p1) - (q2 * q2 + p2 * p2) + 0.5 * p2 * (p1 * p1 - q1 * q1)
                - q1 * q2 * p1
        },
        |u, out| {
            let (p1, p2, q1, q2) = (u[0], u[1], u[2], u[3]);
            out[0] = -q1 + p2 * q1 + q2 * p1;
            out[1] = 2.0 * q2 + q1 * p1;
            out[2] = p1 + p2 * p1 - q1 * q2;
            out[3] = -2.0 * p2 + 0.5 * (p1 * p1 - q1 * q1);
        },
    )
}

// Double-pendulum parameters (unit masses and rod lengths).
const DP_M1: f64 = 1.0;
const DP_M2: f64 = 1.0;
const DP_L1: f64 = 1.0;
const DP_L2: f64 = 1.0;
const DP_G: f64 = 9.8;

fn dp_bracket(dq: f64) -> f64 {
    DP_M1 + DP_M2 * dq.sin() * dq.sin()
}

fn dp_c1(p1: f64, p2: f64, dq: f64) -> f64 {
    p1 * p2 * dq.sin() / (DP_L1 * DP_L2 * dp_bracket(dq))
}

fn dp_c2(p1: f64, p2: f64, dq: f64) -> f64 {
    let b = dp_bracket(dq);
    let num = DP_M2 * DP_L2 * DP_L2 * p1 * p1 + (DP_M1 + DP_M2) * DP_L1 * DP_L1 * p2 * p2
        - 2.0 * DP_M2 * DP_L1 * DP_L2 * p1 * p2 * dq.cos();
    num / (2.0 * DP_L1 * DP_L1 * DP_L2 * DP_L2 * b * b)
}

/// Planar double pendulum in canonical coordinates.
fn double_pendulum() -> Result<HamiltonianSystem> {
    let domain = DomainBox::new(vec![-5.0, -4.0, -1.0, -1.0], vec![5.0, 4.0, 1.0, 1.0])?;
    HamiltonianSystem::new(
        "double_pendulum",
        2,
        domain,
        |u| {
            let (p1, p2, q1, q2) = (u[0], u[1], u[2], u[3]);
            let dq = q1 - q2;
            let num = DP_M2 * DP_L2 * DP_L2 * p1 * p1 + (DP_M1 + DP_M2) * DP_L1 * DP_L1 * p2 * p2
                - 2.0 * DP_M2 * DP_L1 * DP_L2 * p1 * p2 * dq.cos();
            num / (2.0 * DP_M2 * DP_L1 * DP_L1 * DP_L2 * DP_L2 * dp_bracket(dq))
                - (DP_M1 + DP_M2) * DP_G * DP_L1 * q1.cos()
                - DP_M2 * DP_G * DP_L2 * q2.cos()
        },
        |u, out| {
            let (p1, p2, q1, q2) = (u[0], u[1], u[2], u[3]);
            let dq = q1 - q2;
            let b = dp_bracket(dq);
            let c1 = dp_c1(p1, p2, dq);
            let c2 = dp_c2(p1, p2, dq);
            let s2 = (2.0 * dq).sin();
            out[0] = -(DP_M1 + DP_M2) * DP_G * DP_L1 * q1.sin() - c1 + c2 * s2;
            out[1] = -DP_M2 * DP_G * DP_L2 * q2.sin() + c1 - c2 * s2;
            out[2] = (DP_L2 * p1 - DP_L1 * p2 * dq.cos()) / (DP_L1 * DP_L1 * DP_L2 * b);
            out[3] = (-DP_M2 * DP_L2 * p1 * dq.cos() + (DP_M1 + DP_M2) * DP_L1 * p2)
                / (DP_M2 * DP_L1 * DP_L2 * DP_L2 * b);
        },
    )
}
