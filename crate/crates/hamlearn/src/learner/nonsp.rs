//! The non-structure-preserving baseline: direct component-wise least
//! squares of the right-hand side over the full basis `W` (constants
//! included). The result is generally not a Hamiltonian field.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::TotalDegreeBasis;
use crate::data::DataPairSet;
use crate::error::{Error, Result};
use crate::phase::StateVector;

use super::problem::{pinv_solve_sym, SolverReport};

const BLOCK_PAIRS: usize = 512;

/// Per-component coefficients: row `i` holds the expansion of the `i`-th
/// right-hand-side component over the `dim_w` basis functions.
#[derive(Debug, Clone)]
pub struct NonSpModel {
    coefficients: DMatrix<f64>,
    basis: Arc<TotalDegreeBasis>,
    report: SolverReport,
}

impl NonSpModel {
    /// `2d x dim_w` coefficient matrix.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn basis(&self) -> &TotalDegreeBasis {
        &self.basis
    }

    pub fn report(&self) -> &SolverReport {
        &self.report
    }

    /// Evaluate the fitted field at a point.
    pub fn vector_field(&self, x: &StateVector) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.basis.dim()];
        let mut ws = self.basis.workspace();
        let mut vals = vec![0.0; self.basis.dim_w()];
        self.basis.eval_all(x.values(), &mut ws, &mut vals)?;
        for i in 0..self.basis.dim() {
            out[i] = (0..self.basis.dim_w())
                .map(|j| self.coefficients[(i, j)] * vals[j])
                .sum();
        }
        Ok(out)
    }

    /// Field closure for integration and the symplecticity test; points the
    /// domain policy rejects evaluate to NaN (surfaced by the integrator).
    pub fn field_fn(&self) -> impl Fn(&[f64], &mut [f64]) + Send + Sync {
        let basis = Arc::clone(&self.basis);
        let coeff = self.coefficients.clone();
        move |x: &[f64], out: &mut [f64]| {
            let mut ws = basis.workspace();
            let mut vals = vec![0.0; basis.dim_w()];
            if basis.eval_all(x, &mut ws, &mut vals).is_err() {
                out.fill(f64::NAN);
                return;
            }
            for i in 0..basis.dim() {
                out[i] = (0..basis.dim_w()).map(|j| coeff[(i, j)] * vals[j]).sum();
            }
        }
    }
}

/// Fit each right-hand-side component independently over the full basis.
pub fn fit_nonsp(pairs: &DataPairSet, basis: &TotalDegreeBasis) -> Result<NonSpModel> {
    if pairs.count() == 0 {
        return Err(Error::EmptyData("fit_nonsp needs at least one pair".into()));
    }
    if pairs.dim() != basis.dim() {
        return Err(Error::Dimension(format!(
            "pair dimension {} does not match basis dimension {}",
            pairs.dim(),
            basis.dim()
        )));
    }
    let dim = basis.dim();
    let w = basis.dim_w();
    let k_total = pairs.count();

    // Value Gram over W and one right-hand side per field component,
    // accumulated in fixed pair order.
    let mut gram = DMatrix::<f64>::zeros(w, w);
    let mut rhs = DMatrix::<f64>::zeros(w, dim);
    let mut ws = basis.workspace();
    let mut start = 0usize;
    while start < k_total {
        let block = (k_total - start).min(BLOCK_PAIRS);
        let mut phi = DMatrix::<f64>::zeros(block, w);
        let mut xdot = DMatrix::<f64>::zeros(block, dim);
        let mut vals = vec![0.0; w];
        for local in 0..block {
            let k = start + local;
            basis.eval_all(pairs.state(k), &mut ws, &mut vals)?;
            for j in 0..w {
                phi[(local, j)] = vals[j];
            }
            for m in 0..dim {
                xdot[(local, m)] = pairs.derivative(k)[m];
            }
        }
        let phit = phi.transpose();
        gram.gemm(1.0, &phit, &phi, 1.0);
        rhs.gemm(1.0, &phit, &xdot, 1.0);
        start += block;
    }
    let scale = 1.0 / k_total as f64;
    gram *= scale;
    rhs *= scale;

    let mut coefficients = DMatrix::<f64>::zeros(dim, w);
    let mut report: Option<SolverReport> = None;
    let mut residual_sq = 0.0;
    for m in 0..dim {
        let b = DVector::from_column_slice(rhs.column(m).as_slice());
        let (c, rep) = pinv_solve_sym(&gram, &b, super::problem::DEFAULT_SOLVE_REL_TOL)?;
        residual_sq += rep.residual * rep.residual;
        for j in 0..w {
            coefficients[(m, j)] = c[j];
        }
        report = Some(rep);
    }
    let mut report = report.expect("dim >= 2");
    report.residual = residual_sq.sqrt();

    Ok(NonSpModel {
        coefficients,
        basis: Arc::new(basis.clone()),
        report,
    })
}
