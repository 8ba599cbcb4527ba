//! End-to-end oracles for the gradient least-squares learner: exact
//! recovery, Gram concentration, basis independence and the
//! structure-preservation order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hamlearn::{
    a_deviation, alignment_error, assemble, fit_nonsp, hamiltonian_deviation, solve, DataPairSet,
    DomainBox, DomainPolicy, HamiltonianSystem, StateVector, TotalDegreeBasis,
    DEFAULT_SOLVE_REL_TOL,
};

fn oscillator() -> HamiltonianSystem {
    HamiltonianSystem::new(
        "oscillator",
        1,
        DomainBox::unit(2).unwrap(),
        |u: &[f64]| 0.5 * (u[0] * u[0] + u[1] * u[1]),
        |u: &[f64], out: &mut [f64]| {
            out[0] = -u[1];
            out[1] = u[0];
        },
    )
    .unwrap()
}

/// Uniform pairs with analytic derivatives from the given system.
fn analytic_pairs(sys: &HamiltonianSystem, count: usize, seed: u64) -> DataPairSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = sys.default_domain();
    let dim = sys.dim();
    let mut states = Vec::with_capacity(count * dim);
    let mut derivs = Vec::with_capacity(count * dim);
    let mut rhs = vec![0.0; dim];
    for _ in 0..count {
        let x = dom.sample_uniform(&mut rng);
        sys.rhs_into(&x, &mut rhs);
        states.extend_from_slice(&x);
        derivs.extend_from_slice(&rhs);
    }
    DataPairSet::from_rows(
        dim,
        vec![0; count],
        (0..count).map(|k| k as f64).collect(),
        states,
        derivs,
    )
    .unwrap()
}

#[test]
fn oscillator_hamiltonian_is_recovered_exactly() {
    let sys = oscillator();
    let basis = TotalDegreeBasis::new(2, sys.default_domain().clone()).unwrap();
    let pairs = analytic_pairs(&sys, 200, 7);
    let model = solve(&assemble(&pairs, &basis).unwrap(), DEFAULT_SOLVE_REL_TOL).unwrap();

    // Sup error of grad H~ against grad H on a dense grid.
    let mut worst: f64 = 0.0;
    for i in 0..21 {
        for j in 0..21 {
            let x = vec![-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
            let u = StateVector::new(x.clone()).unwrap();
            let g = model.htilde_grad(&u).unwrap();
            worst = worst.max((g[0] - x[0]).abs()).max((g[1] - x[1]).abs());
        }
    }
    assert!(worst < 1e-8, "sup gradient error {worst}");

    let samples: Vec<StateVector> = (0..100)
        .map(|k| {
            let t = k as f64 / 50.0 - 0.99;
            StateVector::new(vec![t, (3.0 * t).sin() * 0.9]).unwrap()
        })
        .collect();
    let align = alignment_error(&model, |x| sys.hamiltonian_raw(x), &samples).unwrap();
    assert!(align.rms_error < 1e-8, "alignment error {}", align.rms_error);
}

#[test]
fn reconstructed_oscillator_matches_the_truth_flow() {
    let sys = oscillator();
    let basis = TotalDegreeBasis::new(2, sys.default_domain().clone()).unwrap();
    let pairs = analytic_pairs(&sys, 200, 3);
    let model = solve(&assemble(&pairs, &basis).unwrap(), DEFAULT_SOLVE_REL_TOL).unwrap();
    let learned = model.reconstructed_system_with(DomainPolicy::Clamp);
    let u0 = StateVector::new(vec![0.0, 0.9]).unwrap();
    let truth = sys.integrate(&u0, 1e-3, 3.0).unwrap();
    let recon = learned.integrate(&u0, 1e-3, 3.0).unwrap();
    for (a, b) in truth.states().iter().zip(recon.states()) {
        for m in 0..2 {
            assert!(
                (a.values()[m] - b.values()[m]).abs() < 1e-7,
                "trajectories diverge: {} vs {}",
                a.values()[m],
                b.values()[m]
            );
        }
    }
}

#[test]
fn nonsp_baseline_recovers_linear_fields_exactly() {
    let sys = oscillator();
    let basis = TotalDegreeBasis::new(2, sys.default_domain().clone()).unwrap();
    let pairs = analytic_pairs(&sys, 300, 11);
    let model = fit_nonsp(&pairs, &basis).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-0.95..0.95)).collect();
        let got = model
            .vector_field(&StateVector::new(x.clone()).unwrap())
            .unwrap();
        assert!((got[0] + x[1]).abs() < 1e-8);
        assert!((got[1] - x[0]).abs() < 1e-8);
    }
}

#[test]
fn whitened_gram_concentrates_with_sample_size() {
    // Qualitative content of the stability lemma: for i.i.d. uniform draws
    // the orthonormalized Gram approaches the identity.
    let dom = DomainBox::unit(2).unwrap();
    let basis = TotalDegreeBasis::new(3, dom.clone()).unwrap();
    let sys = oscillator();
    let big = analytic_pairs(&sys, 100_000, 13);
    let dev_big = a_deviation(&big, &basis).unwrap();
    assert!(
        dev_big < 0.05,
        "K = 1e5 should concentrate below 0.05, got {dev_big}"
    );
    let small = analytic_pairs(&sys, 1_000, 13);
    let dev_small = a_deviation(&small, &basis).unwrap();
    assert!(
        dev_big < dev_small,
        "more samples should tighten the Gram: {dev_big} vs {dev_small}"
    );
}

#[test]
fn solution_field_is_independent_of_the_basis_choice() {
    // Re-combining the nonconstant basis functions by an invertible matrix
    // must leave grad H~ unchanged. Solve once with the raw Legendre basis
    // and once in a whitened recombination, then map back.
    use nalgebra::{DMatrix, DVector};
    let sys = oscillator();
    let basis = TotalDegreeBasis::new(3, sys.default_domain().clone()).unwrap();
    let pairs = analytic_pairs(&sys, 500, 23);
    let problem = assemble(&pairs, &basis).unwrap();
    let model = solve(&problem, DEFAULT_SOLVE_REL_TOL).unwrap();

    // Any invertible T gives A' = T^T A T, b' = T^T b, c = T c'.
    let n = basis.dim_v();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let t = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            1.0 + rng.random_range(0.1..0.9)
        } else {
            rng.random_range(-0.3..0.3)
        }
    });
    let a_prime = t.transpose() * problem.gram() * &t;
    let b_prime = t.transpose() * problem.rhs_vec();
    let c_prime = a_prime
        .clone()
        .svd(true, true)
        .solve(&b_prime, 1e-13)
        .unwrap();
    let c_back: DVector<f64> = &t * c_prime;

    for (a, b) in model.coefficients().iter().zip(c_back.iter()) {
        assert!(
            (a - b).abs() < 1e-8,
            "basis recombination changed the solution: {a} vs {b}"
        );
    }
}

#[test]
fn learned_models_conserve_their_hamiltonian_at_order_four() {
    // Theorem-level structure preservation: the exact flow conserves H~, so
    // the RK4 deviation shrinks at the integrator's order.
    let pend = hamlearn::builtin_system("pendulum").unwrap();
    let basis = TotalDegreeBasis::new(4, pend.default_domain().clone()).unwrap();
    let pairs = analytic_pairs(&pend, 2_000, 41);
    let model = solve(&assemble(&pairs, &basis).unwrap(), DEFAULT_SOLVE_REL_TOL).unwrap();
    let learned = model.reconstructed_system_with(DomainPolicy::Clamp);
    let u0 = StateVector::new(vec![-3.876, -1.193]).unwrap();

    let sup_dev = |tau: f64| -> f64 {
        let traj = learned.integrate(&u0, tau, 5.0).unwrap();
        hamiltonian_deviation(&traj, |s| learned.hamiltonian(s).unwrap())
            .iter()
            .fold(0.0_f64, |m, &(_, d)| m.max(d.abs()))
    };
    let e1 = sup_dev(4e-3);
    let e2 = sup_dev(2e-3);
    let e3 = sup_dev(1e-3);
    let order12 = (e1 / e2).log2();
    let order23 = (e2 / e3).log2();
    for order in [order12, order23] {
        assert!(
            (3.5..=4.2).contains(&order),
            "expected fourth-order conservation decay, got {order} ({e1:.3e}, {e2:.3e}, {e3:.3e})"
        );
    }
}
