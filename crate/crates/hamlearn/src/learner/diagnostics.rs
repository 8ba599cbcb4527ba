//! Diagnostic quantities: the truncation operator, the whitened Gram
//! deviation, best-approximation and quotient-space errors, and the
//! symplecticity (gradient-field) test.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{DomainBox, TotalDegreeBasis};
use crate::data::DataPairSet;
use crate::error::{Error, Result};
use crate::phase::StateVector;

use super::model::HamiltonianModel;
use super::problem::assemble;

/// Scalar diagnostics attached to an experiment run.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    /// Spectral deviation of the whitened data Gram from the identity.
    pub a_minus_i_norm: f64,
    /// `|| grad H - Pi_V(grad H) ||` under the uniform measure.
    pub best_approx_error: f64,
    /// Quotient-space RMS error of the learned Hamiltonian.
    pub alignment_error: f64,
    /// Jacobian-asymmetry of the learned field (zero for gradient fields).
    pub symplectic_defect: f64,
    /// Truncation level `L` used by the error bound.
    pub truncation_level: f64,
}

/// Radial truncation `T_L(g) = L g / max(||g||, L)`: clips `g` to the ball
/// of radius `L`.
pub fn truncate_tl(g: &[f64], level: f64) -> Result<Vec<f64>> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::Argument(format!(
            "truncation level must be positive, got {level}"
        )));
    }
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = level / norm.max(level);
    if scale == 1.0 {
        return Ok(g.to_vec());
    }
    Ok(g.iter().map(|v| v * scale).collect())
}

/// Max Jacobian asymmetry of `x -> J f(x)` over points sampled uniformly in
/// the (slightly shrunk) box; the Jacobian uses central differences with
/// step `1e-5` of the coordinate extent. Hamiltonian fields give zero up to
/// the stencil error.
pub fn symplectic_defect<F>(field: F, domain: &DomainBox, samples: usize) -> Result<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    if samples == 0 {
        return Err(Error::Argument("need at least one sample point".into()));
    }
    let dim = domain.dim();
    let rel_step = 1e-5;
    // Keep the finite-difference stencil inside the box.
    let inner = domain.shrunk(2.0 * rel_step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5d_defec7);
    let mut fplus = vec![0.0; dim];
    let mut fminus = vec![0.0; dim];
    let mut jplus = vec![0.0; dim];
    let mut jminus = vec![0.0; dim];
    let mut jac = vec![0.0; dim * dim];
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = inner.sample_uniform(&mut rng);
        for m in 0..dim {
            let h = rel_step * domain.extent(m);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[m] += h;
            xm[m] -= h;
            field(&xp, &mut fplus);
            field(&xm, &mut fminus);
            crate::phase::apply_j_into(&fplus, &mut jplus);
            crate::phase::apply_j_into(&fminus, &mut jminus);
            for i in 0..dim {
                // Column m of the Jacobian of J f.
                jac[i * dim + m] = (jplus[i] - jminus[i]) / (2.0 * h);
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let asym = (jac[i * dim + j] - jac[j * dim + i]).abs();
                if !asym.is_finite() {
                    return Err(Error::Argument(
                        "field evaluation produced non-finite Jacobian entries".into(),
                    ));
                }
                worst = worst.max(asym);
            }
        }
    }
    Ok(worst)
}

/// Exact (quadrature) gradient Gram of the nonconstant basis under the
/// uniform probability measure on the basis domain.
fn quadrature_gram(basis: &TotalDegreeBasis, points_per_axis: usize) -> Result<DMatrix<f64>> {
    let n = basis.dim_v();
    let dim = basis.dim();
    let grid = crate::basis::QuadratureGrid::new(basis.domain(), points_per_axis)?;
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut ws = basis.workspace();
    let mut grads = vec![0.0; basis.dim_w() * dim];
    for (x, &w) in grid.points.iter().zip(&grid.weights) {
        basis.grad_all(x, &mut ws, &mut grads)?;
        for i in 0..n {
            for j in i..n {
                let mut dot = 0.0;
                for m in 0..dim {
                    dot += grads[(i + 1) * dim + m] * grads[(j + 1) * dim + m];
                }
                gram[(i, j)] += w * dot;
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            gram[(j, i)] = gram[(i, j)];
        }
    }
    Ok(gram)
}

/// Symmetric inverse square root via eigendecomposition; errors on a
/// numerically singular matrix.
fn inverse_sqrt(sym: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let n = sym.nrows();
    let eig = sym.clone().symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let bad: Vec<String> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= 1e-12 * lambda_max)
        .map(|i| format!("direction {i} (lambda = {:.3e})", eig.eigenvalues[i]))
        .collect();
    if !bad.is_empty() {
        return Err(Error::RankDeficient(format!(
            "{what} is numerically singular: {}",
            bad.join(", ")
        )));
    }
    let u = &eig.eigenvectors;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += u[(i, k)] * u[(j, k)] / eig.eigenvalues[k].sqrt();
            }
            w[(i, j)] = acc;
        }
    }
    Ok(w)
}

/// `||A - I||` (spectral) after orthonormalizing the gradient basis against
/// the uniform measure with an exact quadrature Gram. This is the quantity
/// whose concentration controls least-squares stability.
pub fn a_deviation(pairs: &DataPairSet, basis: &TotalDegreeBasis) -> Result<f64> {
    let quad = quadrature_gram(basis, basis.degree() as usize + 1)?;
    let w = inverse_sqrt(&quad, "quadrature gradient Gram")?;
    let problem = assemble(pairs, basis)?;
    let whitened = &w * problem.gram() * &w;
    let eig = whitened.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, &l| m.max((l - 1.0).abs())))
}

/// `|| grad H - Pi_V(grad H) ||_{2, L^2}` under the uniform probability
/// measure, computed on a tensor Gauss-Legendre grid with `points_per_axis`
/// nodes per coordinate.
pub fn best_approx_error<G>(
    truth_grad: G,
    basis: &TotalDegreeBasis,
    points_per_axis: usize,
) -> Result<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = basis.dim_v();
    let dim = basis.dim();
    let grid = crate::basis::QuadratureGrid::new(basis.domain(), points_per_axis)?;
    let gram = quadrature_gram(basis, points_per_axis)?;
    let mut rhs = DVector::<f64>::zeros(n);
    let mut ws = basis.workspace();
    let mut grads = vec![0.0; basis.dim_w() * dim];
    for (x, &w) in grid.points.iter().zip(&grid.weights) {
        basis.grad_all(x, &mut ws, &mut grads)?;
        let g = truth_grad(x);
        for i in 0..n {
            let mut dot = 0.0;
            for m in 0..dim {
                dot += g[m] * grads[(i + 1) * dim + m];
            }
            rhs[i] += w * dot;
        }
    }
    let (coeff, _) = super::problem::pinv_solve_sym(&gram, &rhs, 1e-12)?;
    // Residual norm by direct quadrature of the pointwise difference.
    let mut err_sq = 0.0;
    for (x, &w) in grid.points.iter().zip(&grid.weights) {
        basis.grad_all(x, &mut ws, &mut grads)?;
        let g = truth_grad(x);
        for m in 0..dim {
            let mut proj = 0.0;
            for i in 0..n {
                proj += coeff[i] * grads[(i + 1) * dim + m];
            }
            let diff = g[m] - proj;
            err_sq += w * diff * diff;
        }
    }
    Ok(err_sq.max(0.0).sqrt())
}

/// Result of the quotient-space alignment: the optimal additive constant and
/// the RMS error after applying it.
#[derive(Debug, Clone, Copy)]
pub struct AlignmentResult {
    pub constant: f64,
    pub rms_error: f64,
}

/// Hamiltonians are defined up to a constant: compute `C` as the sample mean
/// of `H - H~_0` and return the RMS of `H~_0 + C - H` over the samples.
pub fn alignment_error<H>(
    model: &HamiltonianModel,
    truth_h: H,
    samples: &[StateVector],
) -> Result<AlignmentResult>
where
    H: Fn(&[f64]) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptyData("alignment needs sample points".into()));
    }
    let mut diffs = Vec::with_capacity(samples.len());
    for x in samples {
        let h = truth_h(x.values());
        let h0 = model.htilde_eval(x)?;
        diffs.push(h - h0);
    }
    let constant = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let rms = (diffs
        .iter()
        .map(|d| (d - constant) * (d - constant))
        .sum::<f64>()
        / diffs.len() as f64)
        .sqrt();
    Ok(AlignmentResult {
        constant,
        rms_error: rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::DomainBox;
    use crate::learner::problem::SolverReport;

    #[test]
    fn truncation_scales_onto_the_ball() {
        let clipped = truncate_tl(&[3.0, 4.0], 1.0).unwrap();
        assert!((clipped[0] - 0.6).abs() < 1e-15);
        assert!((clipped[1] - 0.8).abs() < 1e-15);
        let kept = truncate_tl(&[3.0, 4.0], 10.0).unwrap();
        assert_eq!(kept, vec![3.0, 4.0]);
        assert!(truncate_tl(&[1.0], 0.0).is_err());
        assert!(truncate_tl(&[1.0], -2.0).is_err());
    }

    #[test]
    fn truncation_is_idempotent_and_norm_bounded() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let g: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let level = rng.random_range(0.1..6.0);
            let once = truncate_tl(&g, level).unwrap();
            let twice = truncate_tl(&once, level).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                assert!(
                    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0),
                    "truncation should be idempotent: {a} vs {b}"
                );
            }
            let norm_g = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let norm_t = once.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm_t <= norm_g.min(level) * (1.0 + 1e-14));
            assert!(norm_t >= norm_g.min(level) * (1.0 - 1e-14));
        }
    }

    #[test]
    fn zero_and_nonsymmetric_fields_have_expected_defects() {
        let domain = DomainBox::unit(2).unwrap();
        let zero = symplectic_defect(|_, out: &mut [f64]| out.fill(0.0), &domain, 25).unwrap();
        assert_eq!(zero, 0.0);
        // f(p, q) = (q, q): J f = (q, -q); the Jacobian of J f has
        // asymmetry |1 - 0| = 1 everywhere.
        let defect = symplectic_defect(
            |x, out: &mut [f64]| {
                out[0] = x[1];
                out[1] = x[1];
            },
            &domain,
            25,
        )
        .unwrap();
        assert!((defect - 1.0).abs() < 1e-9, "defect {defect}");
    }

    #[test]
    fn hamiltonian_model_fields_pass_the_symplecticity_test() {
        let basis = TotalDegreeBasis::new(4, DomainBox::unit(2).unwrap()).unwrap();
        let coeffs: Vec<f64> = (0..basis.dim_v())
            .map(|i| ((i * 13 + 5) % 7) as f64 / 5.0 - 0.6)
            .collect();
        let model = HamiltonianModel::from_parts(
            coeffs,
            basis,
            SolverReport {
                rank: 0,
                truncated: 0,
                eig_min: 0.0,
                eig_max: 0.0,
                rel_tol: 0.0,
                residual: 0.0,
            },
            String::new(),
        )
        .unwrap();
        let sys = model.reconstructed_system();
        let defect = symplectic_defect(
            |x, out: &mut [f64]| sys.rhs_into(x, out),
            sys.default_domain(),
            50,
        )
        .unwrap();
        assert!(defect <= 1e-4, "reconstructed field defect {defect}");
    }

    #[test]
    fn single_pair_deviation_is_large() {
        let basis = TotalDegreeBasis::new(2, DomainBox::unit(2).unwrap()).unwrap();
        let pairs = DataPairSet::from_rows(
            2,
            vec![0],
            vec![0.0],
            vec![0.3, -0.4],
            vec![1.0, 1.0],
        )
        .unwrap();
        let dev = a_deviation(&pairs, &basis).unwrap();
        assert!(
            dev >= 0.5,
            "rank-1 data Gram must deviate strongly from I, got {dev}"
        );
    }

    #[test]
    fn duplicated_data_leaves_the_deviation_unchanged() {
        let basis = TotalDegreeBasis::new(2, DomainBox::unit(2).unwrap()).unwrap();
        let xs: Vec<(Vec<f64>, Vec<f64>)> = (0..25)
            .map(|i| {
                let t = i as f64 / 12.5 - 1.0;
                (vec![0.9 * t, 0.8 - 0.6 * t * t], vec![t, 1.0])
            })
            .collect();
        let build = |pts: &[(Vec<f64>, Vec<f64>)]| {
            DataPairSet::from_rows(
                2,
                vec![0; pts.len()],
                (0..pts.len()).map(|k| k as f64).collect(),
                pts.iter().flat_map(|(x, _)| x.clone()).collect(),
                pts.iter().flat_map(|(_, d)| d.clone()).collect(),
            )
            .unwrap()
        };
        let doubled: Vec<_> = xs.iter().cloned().chain(xs.iter().cloned()).collect();
        let d1 = a_deviation(&build(&xs), &basis).unwrap();
        let d2 = a_deviation(&build(&doubled), &basis).unwrap();
        assert!((d1 - d2).abs() < 1e-12, "{d1} vs {d2}");
    }

    #[test]
    fn members_of_v_project_to_themselves() {
        let basis = TotalDegreeBasis::new(3, DomainBox::unit(2).unwrap()).unwrap();
        // grad of H(p, q) = p^2 q is in V for n = 3.
        let err = best_approx_error(
            |x| vec![2.0 * x[0] * x[1], x[0] * x[0]],
            &basis,
            8,
        )
        .unwrap();
        assert!(err < 1e-8, "projection residual {err} for a member of V");
    }

    #[test]
    fn best_approx_error_is_nonincreasing_in_degree() {
        let pend = crate::phase::builtin_system("pendulum").unwrap();
        let truth = |x: &[f64]| {
            let mut rhs = vec![0.0; 2];
            pend.rhs_into(x, &mut rhs);
            crate::phase::apply_j(&rhs).unwrap()
        };
        let mut previous = f64::INFINITY;
        for degree in [2u32, 4, 6] {
            let basis =
                TotalDegreeBasis::new(degree, pend.default_domain().clone()).unwrap();
            let err = best_approx_error(&truth, &basis, 24).unwrap();
            assert!(
                err <= previous * (1.0 + 1e-12),
                "nested spaces: degree {degree} error {err} above {previous}"
            );
            assert!(err > 0.0, "sin q is not a polynomial");
            previous = err;
        }
    }

    #[test]
    fn alignment_absorbs_additive_constants() {
        let basis = TotalDegreeBasis::new(2, DomainBox::unit(2).unwrap()).unwrap();
        // Model: H~_0(x) = x1 (coefficient on index (1, 0)).
        let idx = basis
            .indices()
            .iter()
            .position(|i| i.exponents() == [1, 0])
            .unwrap();
        let mut coeffs = vec![0.0; basis.dim_v()];
        coeffs[idx - 1] = 1.0;
        let model = HamiltonianModel::from_parts(
            coeffs,
            basis,
            SolverReport {
                rank: 0,
                truncated: 0,
                eig_min: 0.0,
                eig_max: 0.0,
                rel_tol: 0.0,
                residual: 0.0,
            },
            String::new(),
        )
        .unwrap();
        let samples: Vec<StateVector> = (0..30)
            .map(|i| {
                let t = i as f64 / 15.0 - 1.0;
                StateVector::new(vec![0.95 * t, t * t - 0.5]).unwrap()
            })
            .collect();
        // Truth = model + 7: the constant is absorbed exactly.
        let res = alignment_error(&model, |x| x[0] + 7.0, &samples).unwrap();
        assert!((res.constant - 7.0).abs() < 1e-12);
        assert!(res.rms_error < 1e-12);
        // Truth = model exactly: C = 0.
        let res0 = alignment_error(&model, |x| x[0], &samples).unwrap();
        assert!(res0.constant.abs() < 1e-12);
        assert!(res0.rms_error < 1e-12);
    }
}
