//! The learned Hamiltonian `H~_0 = sum_j c_j phi_j` (additive constant fixed
//! to zero) and the dynamical system it induces.

use std::sync::Arc;

use crate::basis::{BasisWorkspace, DomainPolicy, TotalDegreeBasis};
use crate::error::{Error, Result};
use crate::phase::{HamiltonianSystem, StateVector};

use super::problem::SolverReport;

/// Coefficients over the nonconstant basis functions, indexed like
/// `basis.indices()[1..]`.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    coefficients: Arc<Vec<f64>>,
    basis: Arc<TotalDegreeBasis>,
    report: SolverReport,
    provenance: String,
}

impl HamiltonianModel {
    pub(crate) fn from_solution(
        coefficients: Vec<f64>,
        basis: Arc<TotalDegreeBasis>,
        report: SolverReport,
        provenance: String,
    ) -> Result<Self> {
        if coefficients.len() != basis.dim_v() {
            return Err(Error::Dimension(format!(
                "coefficient count {} does not match dim V = {}",
                coefficients.len(),
                basis.dim_v()
            )));
        }
        Ok(Self {
            coefficients: Arc::new(coefficients),
            basis,
            report,
            provenance,
        })
    }

    /// Public constructor for models built outside the solver (file loading,
    /// tests).
    pub fn from_parts(
        coefficients: Vec<f64>,
        basis: TotalDegreeBasis,
        report: SolverReport,
        provenance: String,
    ) -> Result<Self> {
        Self::from_solution(coefficients, Arc::new(basis), report, provenance)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &TotalDegreeBasis {
        &self.basis
    }

    pub fn report(&self) -> &SolverReport {
        &self.report
    }

    /// Content hash of the training pair set.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `H~_0(x) = sum_j c_j phi_j(x)` with the constant `C = 0`.
    pub fn htilde_eval(&self, x: &StateVector) -> Result<f64> {
        let mut ws = self.basis.workspace();
        self.htilde_eval_prepared(x.values(), &mut ws)
    }

    pub(crate) fn htilde_eval_prepared(&self, x: &[f64], ws: &mut BasisWorkspace) -> Result<f64> {
        self.basis.prepare(x, ws)?;
        let mut acc = 0.0;
        for (j, &c) in self.coefficients.iter().enumerate() {
            acc += c * self.basis.eval_prepared(j + 1, ws);
        }
        Ok(acc)
    }

    /// Analytic gradient `grad H~(x) = sum_j c_j grad phi_j(x)`.
    pub fn htilde_grad(&self, x: &StateVector) -> Result<Vec<f64>> {
        let mut ws = self.basis.workspace();
        let mut out = vec![0.0; self.basis.dim()];
        self.htilde_grad_prepared(x.values(), &mut ws, &mut out)?;
        Ok(out)
    }

    pub(crate) fn htilde_grad_prepared(
        &self,
        x: &[f64],
        ws: &mut BasisWorkspace,
        out: &mut [f64],
    ) -> Result<()> {
        self.basis.prepare(x, ws)?;
        out.fill(0.0);
        let dim = self.basis.dim();
        let mut g = vec![0.0; dim];
        for (j, &c) in self.coefficients.iter().enumerate() {
            self.basis.grad_prepared(j + 1, ws, &mut g);
            for m in 0..dim {
                out[m] += c * g[m];
            }
        }
        Ok(())
    }

    /// The induced system `du/dt = J^{-1} grad H~(u)` under the model
    /// basis's domain policy. With the strict policy, evaluation outside the
    /// domain writes NaN, which the integrator surfaces as an integration
    /// error instead of silently extrapolating.
    pub fn reconstructed_system(&self) -> HamiltonianSystem {
        self.reconstructed_system_with(self.basis.policy())
    }

    /// Same, with an explicit domain policy for the simulation.
    pub fn reconstructed_system_with(&self, policy: DomainPolicy) -> HamiltonianSystem {
        let basis = Arc::new(self.basis.as_ref().clone().with_policy(policy));
        let coeff = Arc::clone(&self.coefficients);
        let dim = basis.dim();

        let h_basis = Arc::clone(&basis);
        let h_coeff = Arc::clone(&coeff);
        let hamiltonian = move |x: &[f64]| -> f64 {
            let mut ws = h_basis.workspace();
            if h_basis.prepare(x, &mut ws).is_err() {
                return f64::NAN;
            }
            let mut acc = 0.0;
            for (j, &c) in h_coeff.iter().enumerate() {
                acc += c * h_basis.eval_prepared(j + 1, &ws);
            }
            acc
        };

        let rhs = move |x: &[f64], out: &mut [f64]| {
            let mut ws = basis.workspace();
            if basis.prepare(x, &mut ws).is_err() {
                out.fill(f64::NAN);
                return;
            }
            let mut grad = vec![0.0; dim];
            let mut g = vec![0.0; dim];
            for (j, &c) in coeff.iter().enumerate() {
                basis.grad_prepared(j + 1, &ws, &mut g);
                for m in 0..dim {
                    grad[m] += c * g[m];
                }
            }
            crate::phase::apply_j_inverse_into(&grad, out);
        };

        HamiltonianSystem::new(
            "reconstructed",
            self.basis.dim_d(),
            self.basis.domain().clone(),
            hamiltonian,
            rhs,
        )
        .expect("model basis dimensions are consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::DomainBox;

    fn report() -> SolverReport {
        SolverReport {
            rank: 0,
            truncated: 0,
            eig_min: 0.0,
            eig_max: 0.0,
            rel_tol: 0.0,
            residual: 0.0,
        }
    }

    fn model_with(coeffs: Vec<f64>, degree: u32) -> HamiltonianModel {
        let basis = TotalDegreeBasis::new(degree, DomainBox::unit(2).unwrap()).unwrap();
        HamiltonianModel::from_parts(coeffs, basis, report(), String::new()).unwrap()
    }

    #[test]
    fn zero_model_is_identically_zero() {
        let m = model_with(vec![0.0; 5], 2);
        let x = StateVector::new(vec![0.3, -0.8]).unwrap();
        assert_eq!(m.htilde_eval(&x).unwrap(), 0.0);
        assert_eq!(m.htilde_grad(&x).unwrap(), vec![0.0, 0.0]);
        let sys = m.reconstructed_system();
        let traj = sys.integrate(&x, 0.1, 1.0).unwrap();
        for s in traj.states() {
            assert_eq!(s, &x);
        }
    }

    #[test]
    fn single_coefficient_picks_one_basis_function() {
        // Indices for degree 2 in graded lex order:
        // (0,0), (0,1), (1,0), (0,2), (1,1), (2,0).
        // Coefficient slot 3 (index (1,1)) scales phi(x) = x1 * x2.
        let mut coeffs = vec![0.0; 5];
        coeffs[3] = 2.5;
        let m = model_with(coeffs, 2);
        let x = StateVector::new(vec![0.4, -0.5]).unwrap();
        assert!((m.htilde_eval(&x).unwrap() - 2.5 * 0.4 * (-0.5)).abs() < 1e-15);
        let g = m.htilde_grad(&x).unwrap();
        assert!((g[0] - 2.5 * (-0.5)).abs() < 1e-15);
        assert!((g[1] - 2.5 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let coeffs: Vec<f64> = (0..14).map(|i| ((i * 7 + 3) % 11) as f64 / 7.0 - 0.6).collect();
        let m = model_with(coeffs, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let h = 1e-6;
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-0.99..0.99)).collect();
            let u = StateVector::new(x.clone()).unwrap();
            let g = m.htilde_grad(&u).unwrap();
            for m_coord in 0..2 {
                let mut plus = x.clone();
                let mut minus = x.clone();
                plus[m_coord] += h;
                minus[m_coord] -= h;
                let fd = (m
                    .htilde_eval(&StateVector::new(plus).unwrap())
                    .unwrap()
                    - m.htilde_eval(&StateVector::new(minus).unwrap()).unwrap())
                    / (2.0 * h);
                let scale = 1.0_f64.max(fd.abs());
                assert!(
                    (g[m_coord] - fd).abs() <= 1e-6 * scale,
                    "model gradient vs fd: {} vs {fd}",
                    g[m_coord]
                );
            }
        }
    }

    #[test]
    fn strict_reconstruction_fails_loudly_outside_the_domain() {
        let mut coeffs = vec![0.0; 5];
        coeffs[1] = 1.0; // some nonzero dynamics
        let m = model_with(coeffs, 2);
        let sys = m.reconstructed_system_with(DomainPolicy::Strict);
        let outside = StateVector::new(vec![5.0, 0.0]).unwrap();
        match sys.integrate(&outside, 0.1, 1.0) {
            Err(Error::Integration { .. }) => {}
            other => panic!("expected integration error, got {other:?}"),
        }
        // The clamping variant extends by projection and succeeds.
        let clamped = m.reconstructed_system_with(DomainPolicy::Clamp);
        assert!(clamped.integrate(&outside, 0.1, 1.0).is_ok());
    }
}
