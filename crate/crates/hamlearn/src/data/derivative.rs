//! Time-derivative estimation: second-order finite differences for clean
//! data and least-squares polynomial de-noising for noisy data.

use nalgebra::DMatrix;

use crate::basis::legendre_eval_with_deriv;
use crate::error::{Error, Result};
use crate::phase::{StateVector, Trajectory};

use super::plan::DenoiseConfig;

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for w in times.windows(2) {
        let local = w[1] - w[0];
        if (local - dt).abs() > 1e-9 * dt {
            return Err(Error::Argument(format!(
                "non-uniform sample spacing: {local} vs mean {dt}"
            )));
        }
    }
    Ok(dt)
}

/// Second-order finite differences: centered stencils in the interior and
/// one-sided three-point stencils at both endpoints. Needs at least three
/// uniformly spaced samples.
pub fn central_diff(traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::Argument(format!(
            "finite differences require at least three data entries, got {n}"
        )));
    }
    let dt = uniform_spacing(traj.times())?;
    let dim = traj.dim();
    let states = traj.states();
    let x = |j: usize, m: usize| states[j].values()[m];
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = vec![0.0; dim];
        for (m, slot) in row.iter_mut().enumerate() {
            *slot = if j == 0 {
                (-3.0 * x(0, m) + 4.0 * x(1, m) - x(2, m)) / (2.0 * dt)
            } else if j == n - 1 {
                (3.0 * x(n - 1, m) - 4.0 * x(n - 2, m) + x(n - 3, m)) / (2.0 * dt)
            } else {
                (x(j + 1, m) - x(j - 1, m)) / (2.0 * dt)
            };
        }
        out.push(row);
    }
    Ok(out)
}

/// Fit a degree-`Q` polynomial per coordinate over the burst (Legendre in
/// re-scaled time for conditioning), differentiate it analytically at every
/// sample time, and optionally replace the states by the fitted values.
pub fn lsfit_denoise(
    traj: &Trajectory,
    cfg: &DenoiseConfig,
) -> Result<(Trajectory, Vec<Vec<f64>>)> {
    let n = traj.len();
    let q = cfg.degree;
    if q + 1 > n {
        return Err(Error::Argument(format!(
            "de-noising degree {q} needs at least {} samples, got {n}",
            q + 1
        )));
    }
    let dim = traj.dim();
    let t0 = traj.times()[0];
    let t1 = traj.times()[n - 1];
    let chain = 2.0 / (t1 - t0);

    // Design matrices in Legendre values and derivatives of the
    // re-centered time s in [-1, 1].
    let mut design = DMatrix::<f64>::zeros(n, q + 1);
    let mut design_deriv = DMatrix::<f64>::zeros(n, q + 1);
    for (j, &t) in traj.times().iter().enumerate() {
        let s = (2.0 * t - t0 - t1) / (t1 - t0);
        for k in 0..=q {
            let (val, der) = legendre_eval_with_deriv(k as u32, s);
            design[(j, k)] = val;
            design_deriv[(j, k)] = der * chain;
        }
    }
    let mut targets = DMatrix::<f64>::zeros(n, dim);
    for (j, s) in traj.states().iter().enumerate() {
        for m in 0..dim {
            targets[(j, m)] = s.values()[m];
        }
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax).count();
    if rank < q + 1 {
        return Err(Error::Argument(format!(
            "rank-deficient de-noising fit (rank {rank} < {}): duplicate sample times?",
            q + 1
        )));
    }
    let coeff = svd
        .solve(&targets, 1e-12 * smax)
        .map_err(|e| Error::Argument(format!("de-noising solve failed: {e}")))?;

    let fitted = &design * &coeff;
    let fitted_deriv = &design_deriv * &coeff;

    let derivatives: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..dim).map(|m| fitted_deriv[(j, m)]).collect())
        .collect();

    let filtered = if cfg.apply_filter {
        let states: Result<Vec<StateVector>> = (0..n)
            .map(|j| StateVector::new((0..dim).map(|m| fitted[(j, m)]).collect()))
            .collect();
        Trajectory::new(traj.times().to_vec(), states?)?
    } else {
        traj.clone()
    };
    Ok((filtered, derivatives))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj_from_fn(times: &[f64], f: impl Fn(f64) -> Vec<f64>) -> Trajectory {
        let states = times
            .iter()
            .map(|&t| StateVector::new(f(t)).unwrap())
            .collect();
        Trajectory::new(times.to_vec(), states).unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn linear_trajectories_differentiate_exactly() {
        let traj = traj_from_fn(&linspace(0.0, 1.0, 6), |t| vec![1.0 + 2.0 * t, -3.0 * t]);
        let ders = central_diff(&traj).unwrap();
        for row in &ders {
            assert!((row[0] - 2.0).abs() < 1e-12);
            assert!((row[1] + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_interior_value_is_exact() {
        let traj = traj_from_fn(&[0.9, 1.0, 1.1], |t| vec![t * t, 0.0]);
        let ders = central_diff(&traj).unwrap();
        assert!((ders[1][0] - 2.0).abs() < 1e-12);
        // One-sided stencils are exact on quadratics too.
        assert!((ders[0][0] - 1.8).abs() < 1e-12);
        assert!((ders[2][0] - 2.2).abs() < 1e-12);
    }

    #[test]
    fn central_diff_is_second_order_on_sine() {
        let error_at = |dt: f64| -> f64 {
            let n = (1.0 / dt).round() as usize + 1;
            let traj = traj_from_fn(&linspace(0.0, 1.0, n), |t| vec![t.sin(), 0.0]);
            let ders = central_diff(&traj).unwrap();
            traj.times()
                .iter()
                .zip(&ders)
                .map(|(&t, row)| (row[0] - t.cos()).abs())
                .fold(0.0, f64::max)
        };
        let e1 = error_at(0.1);
        let e2 = error_at(0.05);
        let ratio = e1 / e2;
        assert!(
            (3.6..=4.4).contains(&ratio),
            "halving dt should reduce the error 4x, got {ratio}"
        );
    }

    #[test]
    fn too_few_samples_and_uneven_spacing_are_errors() {
        let traj = traj_from_fn(&[0.0, 0.1], |t| vec![t, t]);
        assert!(central_diff(&traj).is_err());
        let uneven = traj_from_fn(&[0.0, 0.1, 0.30001], |t| vec![t, t]);
        assert!(central_diff(&uneven).is_err());
    }

    #[test]
    fn polynomial_trajectories_are_reproduced() {
        // Degree-3 data fitted with Q = 3: filter is the identity and the
        // derivative is exact.
        let poly = |t: f64| vec![1.0 - t + 0.5 * t.powi(3), 2.0 * t * t];
        let dpoly = |t: f64| [-1.0 + 1.5 * t * t, 4.0 * t];
        let traj = traj_from_fn(&linspace(0.0, 2.0, 9), poly);
        let cfg = DenoiseConfig::new(3, true).unwrap();
        let (filtered, ders) = lsfit_denoise(&traj, &cfg).unwrap();
        for (orig, fit) in traj.states().iter().zip(filtered.states()) {
            for m in 0..2 {
                assert!((orig.values()[m] - fit.values()[m]).abs() < 1e-10);
            }
        }
        for (&t, row) in traj.times().iter().zip(&ders) {
            let want = dpoly(t);
            assert!((row[0] - want[0]).abs() < 1e-8);
            assert!((row[1] - want[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_trajectories_have_zero_derivative() {
        let traj = traj_from_fn(&linspace(0.0, 1.0, 7), |_| vec![4.0, -2.0]);
        for q in 1..=4 {
            let cfg = DenoiseConfig::new(q, false).unwrap();
            let (filtered, ders) = lsfit_denoise(&traj, &cfg).unwrap();
            assert_eq!(&filtered, &traj, "no filter requested");
            for row in &ders {
                assert!(row[0].abs() < 1e-12 && row[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degree_must_fit_the_sample_count() {
        let traj = traj_from_fn(&linspace(0.0, 1.0, 4), |t| vec![t, t]);
        let cfg = DenoiseConfig::new(4, false).unwrap();
        assert!(lsfit_denoise(&traj, &cfg).is_err());
    }

    #[test]
    fn fit_is_linear_in_the_data() {
        let times = linspace(0.0, 1.0, 11);
        let fa = |t: f64| vec![t.sin(), t * t];
        let fb = |t: f64| vec![(3.0 * t).cos(), 1.0 - t];
        let cfg = DenoiseConfig::new(4, false).unwrap();
        let (_, da) = lsfit_denoise(&traj_from_fn(&times, fa), &cfg).unwrap();
        let (_, db) = lsfit_denoise(&traj_from_fn(&times, fb), &cfg).unwrap();
        let (_, dsum) = lsfit_denoise(
            &traj_from_fn(&times, |t| {
                fa(t).iter().zip(fb(t).iter()).map(|(a, b)| a + b).collect()
            }),
            &cfg,
        )
        .unwrap();
        for j in 0..times.len() {
            for m in 0..2 {
                assert!(
                    (dsum[j][m] - (da[j][m] + db[j][m])).abs() < 1e-12,
                    "least-squares fitting must be linear"
                );
            }
        }
    }

    #[test]
    fn denoising_agrees_with_central_diff_on_low_degree_polys() {
        let times = linspace(0.0, 1.0, 9);
        let traj = traj_from_fn(&times, |t| vec![1.0 + 2.0 * t - t * t, 0.5 * t]);
        let cd = central_diff(&traj).unwrap();
        let cfg = DenoiseConfig::new(2, false).unwrap();
        let (_, ls) = lsfit_denoise(&traj, &cfg).unwrap();
        for j in 0..times.len() {
            for m in 0..2 {
                assert!(
                    (cd[j][m] - ls[j][m]).abs() < 1e-10,
                    "both estimators are exact on quadratics"
                );
            }
        }
    }
}
