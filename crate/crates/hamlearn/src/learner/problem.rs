//! Assembly and solution of the normal-equations system `A c = b` with
//! `a_ij = (1/K) sum_k grad phi_i(x_k) . grad phi_j(x_k)` and
//! `b_i = (1/K) sum_k (J xdot_k) . grad phi_i(x_k)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::TotalDegreeBasis;
use crate::data::DataPairSet;
use crate::error::{Error, Result};

use super::model::HamiltonianModel;

/// Eigenvalue cutoff for the pseudo-inverse, relative to the largest
/// eigenvalue.
pub const DEFAULT_SOLVE_REL_TOL: f64 = 1e-10;

/// Pairs are consumed in blocks of this many rows of the stacked gradient
/// matrix; summation order is fixed by the pair index, so assembly is
/// bitwise reproducible.
const BLOCK_PAIRS: usize = 512;

/// The assembled normal-equations problem.
#[derive(Debug, Clone)]
pub struct GradientLSProblem {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    basis: Arc<TotalDegreeBasis>,
    count: usize,
    data_hash: String,
}

impl GradientLSProblem {
    #[cfg(test)]
    pub(crate) fn from_parts(
        gram: DMatrix<f64>,
        rhs: DVector<f64>,
        basis: Arc<TotalDegreeBasis>,
        count: usize,
        data_hash: String,
    ) -> Self {
        Self {
            gram,
            rhs,
            basis,
            count,
            data_hash,
        }
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn rhs_vec(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn basis(&self) -> &TotalDegreeBasis {
        &self.basis
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// True when the paper's regime `N < K` is violated; callers may warn
    /// but assembly proceeds.
    pub fn is_underdetermined(&self) -> bool {
        self.basis.dim_v() >= self.count
    }

    pub fn data_hash(&self) -> &str {
        &self.data_hash
    }
}

/// Assemble the Gram matrix and right-hand side from the pair set.
pub fn assemble(pairs: &DataPairSet, basis: &TotalDegreeBasis) -> Result<GradientLSProblem> {
    if pairs.count() == 0 {
        return Err(Error::EmptyData("assemble needs at least one pair".into()));
    }
    if pairs.dim() != basis.dim() {
        return Err(Error::Dimension(format!(
            "pair dimension {} does not match basis dimension {}",
            pairs.dim(),
            basis.dim()
        )));
    }
    let dim = basis.dim();
    let n = basis.dim_v();
    let k_total = pairs.count();

    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut ws = basis.workspace();
    let mut grads = vec![0.0; basis.dim_w() * dim];
    let mut jx = vec![0.0; dim];

    let mut start = 0usize;
    while start < k_total {
        let block = (k_total - start).min(BLOCK_PAIRS);
        let rows = block * dim;
        // G holds one row per gradient component per pair; y the matching
        // entries of J xdot.
        let mut g = DMatrix::<f64>::zeros(rows, n);
        let mut y = DVector::<f64>::zeros(rows);
        for local in 0..block {
            let k = start + local;
            basis.grad_all(pairs.state(k), &mut ws, &mut grads)?;
            crate::phase::apply_j_into(pairs.derivative(k), &mut jx);
            for m in 0..dim {
                let row = local * dim + m;
                y[row] = jx[m];
                for j in 1..basis.dim_w() {
                    g[(row, j - 1)] = grads[j * dim + m];
                }
            }
        }
        let gt = g.transpose();
        gram.gemm(1.0, &gt, &g, 1.0);
        rhs.gemv(1.0, &gt, &y, 1.0);
        start += block;
    }
    let scale = 1.0 / k_total as f64;
    gram *= scale;
    rhs *= scale;

    Ok(GradientLSProblem {
        gram,
        rhs,
        basis: Arc::new(basis.clone()),
        count: k_total,
        data_hash: pairs.content_hash(),
    })
}

/// Report of the pseudo-inverse solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub rank: usize,
    pub truncated: usize,
    pub eig_min: f64,
    pub eig_max: f64,
    pub rel_tol: f64,
    pub residual: f64,
}

/// Least-squares solve of the symmetric system `A x = b` by eigendecomposition,
/// truncating eigenvalues below `rel_tol * lambda_max`.
pub(crate) fn pinv_solve_sym(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rel_tol: f64,
) -> Result<(DVector<f64>, SolverReport)> {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let eig_max = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let eig_min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(eig_max.is_finite() && eig_max > 0.0) {
        return Err(Error::Degenerate(format!(
            "no positive eigenvalues (max = {eig_max})"
        )));
    }
    let cutoff = rel_tol * eig_max;
    let mut x = DVector::<f64>::zeros(n);
    let mut rank = 0usize;
    for i in 0..n {
        let lambda = eig.eigenvalues[i];
        if lambda > cutoff {
            rank += 1;
            let v = eig.eigenvectors.column(i);
            let proj = v.dot(b) / lambda;
            x.axpy(proj, &v, 1.0);
        }
    }
    if rank == 0 {
        return Err(Error::Degenerate(format!(
            "all {n} eigenvalues fall below the cutoff {cutoff:.3e}"
        )));
    }
    let residual = (a * &x - b).norm();
    Ok((
        x,
        SolverReport {
            rank,
            truncated: n - rank,
            eig_min,
            eig_max,
            rel_tol,
            residual,
        },
    ))
}

/// Solve the assembled problem for the Hamiltonian coefficients.
pub fn solve(problem: &GradientLSProblem, rel_tol: f64) -> Result<HamiltonianModel> {
    let (coeff, report) = pinv_solve_sym(&problem.gram, &problem.rhs, rel_tol)?;
    HamiltonianModel::from_solution(
        coeff.as_slice().to_vec(),
        Arc::clone(&problem.basis),
        report,
        problem.data_hash.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::DomainBox;

    fn unit_basis(degree: u32) -> TotalDegreeBasis {
        TotalDegreeBasis::new(degree, DomainBox::unit(2).unwrap()).unwrap()
    }

    fn pairs_from(points: &[(Vec<f64>, Vec<f64>)]) -> DataPairSet {
        let dim = points[0].0.len();
        let ids = vec![0u32; points.len()];
        let times: Vec<f64> = (0..points.len()).map(|k| k as f64).collect();
        let states: Vec<f64> = points.iter().flat_map(|(x, _)| x.clone()).collect();
        let derivs: Vec<f64> = points.iter().flat_map(|(_, d)| d.clone()).collect();
        DataPairSet::from_rows(dim, ids, times, states, derivs).unwrap()
    }

    #[test]
    fn single_pair_degenerate_sums() {
        // n = 1 basis: nonconstant functions are x2 and x1 with constant
        // gradients (0, 1) and (1, 0).
        let basis = unit_basis(1);
        let x = vec![0.3, -0.2];
        let xdot = vec![0.5, 0.25]; // J xdot = (0.25, -0.5)
        let pairs = pairs_from(&[(x, xdot)]);
        let problem = assemble(&pairs, &basis).unwrap();
        let a = problem.gram();
        assert!((a[(0, 0)] - 1.0).abs() < 1e-15); // ||grad phi_1||^2
        assert!((a[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(a[(0, 1)].abs() < 1e-15);
        let b = problem.rhs_vec();
        assert!((b[0] - (-0.5)).abs() < 1e-15); // (J xdot) . (0, 1)
        assert!((b[1] - 0.25).abs() < 1e-15); // (J xdot) . (1, 0)
        assert!(problem.is_underdetermined()); // N = 2 >= K = 1
    }

    #[test]
    fn duplicating_every_pair_changes_nothing() {
        let basis = unit_basis(3);
        let base: Vec<(Vec<f64>, Vec<f64>)> = (0..40)
            .map(|i| {
                let t = i as f64 / 40.0;
                (
                    vec![0.8 * (3.0 * t).sin(), 0.9 * (2.0 * t).cos()],
                    vec![t, 1.0 - t],
                )
            })
            .collect();
        let doubled: Vec<(Vec<f64>, Vec<f64>)> =
            base.iter().cloned().chain(base.iter().cloned()).collect();
        let p1 = assemble(&pairs_from(&base), &basis).unwrap();
        let p2 = assemble(&pairs_from(&doubled), &basis).unwrap();
        let diff = (p1.gram() - p2.gram()).norm() / p1.gram().norm();
        assert!(diff < 1e-12, "averaging invariance broken: {diff}");
        let bdiff = (p1.rhs_vec() - p2.rhs_vec()).norm() / p1.rhs_vec().norm().max(1.0);
        assert!(bdiff < 1e-12);
    }

    #[test]
    fn gram_is_symmetric_and_psd() {
        let basis = unit_basis(4);
        let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..100)
            .map(|i| {
                let t = i as f64 / 50.0 - 1.0;
                (vec![t, (t * 2.0).sin() * 0.9], vec![1.0, t])
            })
            .collect();
        let problem = assemble(&pairs_from(&pts), &basis).unwrap();
        let a = problem.gram();
        let asym = (a - a.transpose()).amax();
        assert!(asym <= 1e-12, "Gram asymmetry {asym}");
        let eig = a.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        assert!(min >= -1e-10 * max, "Gram not PSD: min {min}, max {max}");
    }

    #[test]
    fn permutation_only_moves_roundoff() {
        let basis = unit_basis(3);
        let base: Vec<(Vec<f64>, Vec<f64>)> = (0..60)
            .map(|i| {
                let t = i as f64 / 30.0 - 1.0;
                (vec![t * 0.9, (t * 7.0).sin() * 0.8], vec![t, t * t])
            })
            .collect();
        let mut reversed = base.clone();
        reversed.reverse();
        let p1 = assemble(&pairs_from(&base), &basis).unwrap();
        let p2 = assemble(&pairs_from(&reversed), &basis).unwrap();
        let diff = (p1.gram() - p2.gram()).amax() / p1.gram().amax();
        assert!(diff < 1e-12, "permutation changed the Gram by {diff}");
    }

    #[test]
    fn identity_system_returns_rhs() {
        let basis = unit_basis(1);
        let problem = GradientLSProblem::from_parts(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![3.0, -4.0]),
            Arc::new(basis),
            10,
            String::new(),
        );
        let model = solve(&problem, DEFAULT_SOLVE_REL_TOL).unwrap();
        assert_eq!(model.coefficients(), &[3.0, -4.0]);
        assert_eq!(model.report().rank, 2);
        assert!(model.report().residual < 1e-14);
    }

    #[test]
    fn rank_deficient_diagonal_uses_the_pseudo_inverse() {
        let basis = unit_basis(1);
        let problem = GradientLSProblem::from_parts(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
            DVector::from_vec(vec![2.0, 0.0]),
            Arc::new(basis),
            10,
            String::new(),
        );
        let model = solve(&problem, DEFAULT_SOLVE_REL_TOL).unwrap();
        assert_eq!(model.coefficients(), &[2.0, 0.0]);
        assert_eq!(model.report().rank, 1);
        assert_eq!(model.report().truncated, 1);
    }

    #[test]
    fn all_zero_gram_is_degenerate() {
        let basis = unit_basis(1);
        let problem = GradientLSProblem::from_parts(
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![1.0, 1.0]),
            Arc::new(basis),
            10,
            String::new(),
        );
        match solve(&problem, DEFAULT_SOLVE_REL_TOL) {
            Err(Error::Degenerate(_)) => {}
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn coefficients_are_linear_in_the_derivatives() {
        // Scaling every xdot by a power of two scales c exactly.
        let basis = unit_basis(2);
        let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
            .map(|i| {
                let t = i as f64 / 25.0 - 1.0;
                (vec![0.7 * t, 0.9 - t * t], vec![t + 0.5, t * t])
            })
            .collect();
        let pairs = pairs_from(&pts);
        let m1 = solve(&assemble(&pairs, &basis).unwrap(), DEFAULT_SOLVE_REL_TOL).unwrap();
        let m2 = solve(
            &assemble(&pairs.scale_derivatives(2.0), &basis).unwrap(),
            DEFAULT_SOLVE_REL_TOL,
        )
        .unwrap();
        for (c1, c2) in m1.coefficients().iter().zip(m2.coefficients()) {
            assert_eq!(
                2.0 * c1,
                *c2,
                "doubling the derivative data must double the coefficients exactly"
            );
        }
    }
}
