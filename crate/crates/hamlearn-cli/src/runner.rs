//! The experiment pipeline: generate, perturb, differentiate, fit, simulate,
//! diagnose and emit.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hamlearn::{
    a_deviation, add_noise, alignment_error, apply_j, assemble, assemble_pairs,
    best_approx_error, check_stability, fit_nonsp, generate_bursts, hamiltonian_deviation,
    kn_estimate, kn_estimate_at, rk4_step, solve, symplectic_defect, BurstPlan, DataPairSet,
    DenoiseConfig, DerivativeMethod, DiagnosticsReport, DomainPolicy, HamiltonianModel,
    HamiltonianSystem, NoiseSpec, StateVector, TotalDegreeBasis, Trajectory,
    DEFAULT_SOLVE_REL_TOL,
};

use crate::config::{DerivativeMethodName, ExperimentConfig, RunError};
use crate::report::{emit_comparison, emit_convergence, emit_outputs, ConvergenceStudy, ExperimentReport};

fn stage<T>(
    timings: &mut Vec<(String, f64)>,
    name: &'static str,
    f: impl FnOnce() -> Result<T, hamlearn::Error>,
) -> Result<T, RunError> {
    let start = Instant::now();
    let out = f().map_err(|source| RunError::Stage { stage: name, source })?;
    timings.push((name.to_string(), start.elapsed().as_secs_f64()));
    Ok(out)
}

/// Per-burst noise stream derived from the master seed; splitmix-style so
/// bursts can be processed in any order.
fn burst_noise_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) struct PreparedData {
    pub system: HamiltonianSystem,
    pub bursts: Vec<Trajectory>,
    pub dropped_bursts: usize,
    pub exited_bursts: usize,
    pub timings: Vec<(String, f64)>,
}

/// Generate and (optionally) perturb the training bursts.
pub(crate) fn prepare_bursts(cfg: &ExperimentConfig) -> Result<PreparedData, RunError> {
    cfg.validate()?;
    let system = cfg.system()?;
    let domain = system.default_domain().clone();
    let mut timings = Vec::new();

    let plan = BurstPlan::new(cfg.trajectories, cfg.steps_per_burst, cfg.dt, cfg.seed)
        .and_then(|p| p.with_fine_ratio(cfg.fine_ratio))
        .map_err(|source| RunError::Stage {
            stage: "plan",
            source,
        })?;

    let batch = stage(&mut timings, "generate", || {
        generate_bursts(&system, &plan, &domain)
    })?;
    if batch.bursts.is_empty() {
        return Err(RunError::Stage {
            stage: "generate",
            source: hamlearn::Error::EmptyData(format!(
                "all {} bursts were dropped",
                cfg.trajectories
            )),
        });
    }

    let bursts: Vec<Trajectory> = if cfg.noise_amplitude > 0.0 {
        let spec = NoiseSpec::multiplicative(cfg.noise_amplitude).map_err(|source| {
            RunError::Stage {
                stage: "noise",
                source,
            }
        })?;
        let start = Instant::now();
        let noised = batch
            .bursts
            .iter()
            .enumerate()
            .map(|(i, b)| add_noise(b, &spec, burst_noise_seed(cfg.seed, i)))
            .collect();
        timings.push(("noise".into(), start.elapsed().as_secs_f64()));
        noised
    } else {
        batch.bursts
    };

    Ok(PreparedData {
        system,
        bursts,
        dropped_bursts: batch.dropped.len(),
        exited_bursts: batch.exited_domain.len(),
        timings,
    })
}

pub(crate) struct LearnedPipeline {
    pub system: HamiltonianSystem,
    pub basis: TotalDegreeBasis,
    pub pairs: DataPairSet,
    pub model: HamiltonianModel,
    pub dropped_bursts: usize,
    pub exited_bursts: usize,
    pub underdetermined: bool,
    pub timings: Vec<(String, f64)>,
}

/// Differentiate, assemble and solve on already-generated bursts.
/// `apply_filter_override` swaps the de-noising filter flag for the
/// no-filter baseline without touching the rest of the config.
pub(crate) fn fit_from_bursts(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    apply_filter_override: Option<bool>,
) -> Result<LearnedPipeline, RunError> {
    let system = data.system.clone();
    let domain = system.default_domain().clone();
    let mut timings = Vec::new();

    let method = match cfg.derivative_method {
        DerivativeMethodName::CentralDiff => DerivativeMethod::CentralDiff,
        DerivativeMethodName::Lsfit => {
            let settings = cfg.denoise.expect("validated");
            let apply_filter = apply_filter_override.unwrap_or(settings.apply_filter);
            DerivativeMethod::LsFit(
                DenoiseConfig::new(settings.degree, apply_filter).map_err(|source| {
                    RunError::Stage {
                        stage: "differentiate",
                        source,
                    }
                })?,
            )
        }
    };

    let pairs = stage(&mut timings, "differentiate", || {
        assemble_pairs(&data.bursts, &method, &domain, cfg.restrict_to_box, None)
    })?;

    let basis = TotalDegreeBasis::new(cfg.degree, domain).map_err(|source| RunError::Stage {
        stage: "basis",
        source,
    })?;
    let problem = stage(&mut timings, "assemble", || assemble(&pairs, &basis))?;
    let underdetermined = problem.is_underdetermined();
    let model = stage(&mut timings, "solve", || {
        solve(&problem, DEFAULT_SOLVE_REL_TOL)
    })?;

    Ok(LearnedPipeline {
        system,
        basis,
        pairs,
        model,
        dropped_bursts: data.dropped_bursts,
        exited_bursts: data.exited_bursts,
        underdetermined,
        timings,
    })
}

/// The learning half of the pipeline: generate, perturb, fit.
pub(crate) fn learn(
    cfg: &ExperimentConfig,
    apply_filter_override: Option<bool>,
) -> Result<LearnedPipeline, RunError> {
    let data = prepare_bursts(cfg)?;
    let mut fitted = fit_from_bursts(cfg, &data, apply_filter_override)?;
    let mut timings = data.timings;
    timings.append(&mut fitted.timings);
    fitted.timings = timings;
    Ok(fitted)
}

/// Integrate a field until the horizon, stopping early (and flagging the
/// divergence) if a step produces non-finite values.
fn integrate_capped(
    system: &HamiltonianSystem,
    u0: &StateVector,
    step: f64,
    horizon: f64,
) -> Result<(Trajectory, bool), hamlearn::Error> {
    match system.integrate(u0, step, horizon) {
        Ok(traj) => Ok((traj, false)),
        Err(hamlearn::Error::Integration { step: failed, .. }) => {
            let mut times = vec![0.0];
            let mut states = vec![u0.clone()];
            let mut current = u0.clone();
            for j in 0..failed {
                current = rk4_step(|u, out| system.rhs_into(u, out), &current, step)?;
                times.push((j + 1) as f64 * step);
                states.push(current.clone());
            }
            Ok((Trajectory::new(times, states)?, true))
        }
        Err(e) => Err(e),
    }
}

/// Deterministic uniform sample of the domain for the alignment constant and
/// the quotient-space error.
fn alignment_samples(system: &HamiltonianSystem, count: usize) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11_6e);
    (0..count)
        .map(|_| {
            StateVector::new(system.default_domain().sample_uniform(&mut rng))
                .expect("finite box")
        })
        .collect()
}

/// Execute the full pipeline for one configuration and write the outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let report = run_experiment_in_memory(cfg)?;
    emit_outputs(&report, &cfg.output_dir)?;
    Ok(report)
}

/// The pipeline without file emission (used by the comparison/convergence
/// drivers and the test suites).
pub fn run_experiment_in_memory(cfg: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let data = prepare_bursts(cfg)?;
    let mut learned = fit_from_bursts(cfg, &data, None)?;
    let mut timings = data.timings.clone();
    timings.append(&mut learned.timings);
    learned.timings = timings;
    let system = learned.system.clone();
    let u0 = StateVector::new(cfg.test_initial_state.clone())
        .map_err(|e| RunError::Config(e.to_string()))?;

    // Simulation: truth and reconstruction on the same grid.
    let start = Instant::now();
    let recon_system = learned.model.reconstructed_system_with(DomainPolicy::Clamp);
    let (truth, truth_diverged) = integrate_truth(cfg, &system, &u0).map_err(|source| {
        RunError::Stage {
            stage: "simulate",
            source,
        }
    })?;
    let (recon, recon_diverged) = integrate_capped(&recon_system, &u0, cfg.eval_step, cfg.horizon)
        .map_err(|source| RunError::Stage {
            stage: "simulate",
            source,
        })?;
    learned
        .timings
        .push(("simulate".into(), start.elapsed().as_secs_f64()));

    // Alignment constant for plotting H~ against H.
    let samples = alignment_samples(&system, 4096);
    let align = alignment_error(&learned.model, |x| system.hamiltonian_raw(x), &samples)
        .map_err(|source| RunError::Stage {
            stage: "diagnostics",
            source,
        })?;

    let shared = truth.len().min(recon.len());
    let mut relative_error_series = Vec::with_capacity(shared);
    let mut hamiltonian_series = Vec::with_capacity(shared);
    for j in 0..shared {
        let t = truth.times()[j];
        let u = &truth.states()[j];
        let v = &recon.states()[j];
        let diff: f64 = u
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = u.values().iter().map(|a| a * a).sum::<f64>().sqrt();
        relative_error_series.push((t, diff / norm.max(1e-12)));
        let h_true = system.hamiltonian(u).map_err(|source| RunError::Stage {
            stage: "simulate",
            source,
        })?;
        let h_model = recon_system.hamiltonian_raw(v.values()) + align.constant;
        hamiltonian_series.push((t, h_true, h_model));
    }
    let deviation_series: Vec<(f64, f64)> =
        hamiltonian_deviation(&recon, |s| recon_system.hamiltonian_raw(s.values()));

    // Diagnostics and the stability check.
    let mut diagnostics = None;
    let mut stability = None;
    let mut kn_empirical = None;
    if cfg.diagnostics {
        let start = Instant::now();
        let truth_grad = |x: &[f64]| {
            let mut rhs = vec![0.0; system.dim()];
            system.rhs_into(x, &mut rhs);
            apply_j(&rhs).expect("dimensions match")
        };
        let ppa = if learned.basis.dim() == 2 { 24 } else { 8 };
        let dev = a_deviation(&learned.pairs, &learned.basis);
        let best = best_approx_error(truth_grad, &learned.basis, ppa);
        let field = |x: &[f64], out: &mut [f64]| recon_system.rhs_into(x, out);
        let defect = symplectic_defect(field, learned.basis.domain(), 100);
        let truncation_level = (0..learned.pairs.count())
            .map(|k| {
                let jx = apply_j(learned.pairs.derivative(k)).expect("even dimension");
                jx.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .fold(0.0_f64, f64::max);
        diagnostics = Some(DiagnosticsReport {
            a_minus_i_norm: dev.map_err(|source| RunError::Stage {
                stage: "diagnostics",
                source,
            })?,
            best_approx_error: best.map_err(|source| RunError::Stage {
                stage: "diagnostics",
                source,
            })?,
            alignment_error: align.rms_error,
            symplectic_defect: defect.map_err(|source| RunError::Stage {
                stage: "diagnostics",
                source,
            })?,
            truncation_level,
        });

        let gppa = if learned.basis.dim() == 2 { 33 } else { 13 };
        let kn_grid = kn_estimate(&learned.basis, gppa, true).map_err(|source| {
            RunError::Stage {
                stage: "diagnostics",
                source,
            }
        })?;
        let states: Vec<StateVector> = (0..learned.pairs.count())
            .map(|k| StateVector::new(learned.pairs.state(k).to_vec()).expect("finite"))
            .collect();
        kn_empirical = Some(
            kn_estimate_at(&learned.basis, &states, true).map_err(|source| RunError::Stage {
                stage: "diagnostics",
                source,
            })?,
        );
        stability = Some(
            check_stability(
                kn_grid,
                learned.pairs.count(),
                cfg.stability_r,
                learned.basis.dim_v(),
            )
            .map_err(|source| RunError::Stage {
                stage: "diagnostics",
                source,
            })?,
        );
        learned
            .timings
            .push(("diagnostics".into(), start.elapsed().as_secs_f64()));
    }

    // Optional no-filter baseline on the same data.
    let mut no_filter_error_series = None;
    if cfg.baselines.no_filter
        && cfg.derivative_method == DerivativeMethodName::Lsfit
        && cfg.denoise.map(|d| d.apply_filter).unwrap_or(false)
    {
        let start = Instant::now();
        // Identical bursts and noise: only the filter flag differs.
        let unfiltered = fit_from_bursts(cfg, &data, Some(false))?;
        let alt_system = unfiltered
            .model
            .reconstructed_system_with(DomainPolicy::Clamp);
        let (alt, _) = integrate_capped(&alt_system, &u0, cfg.eval_step, cfg.horizon).map_err(
            |source| RunError::Stage {
                stage: "simulate",
                source,
            },
        )?;
        let shared = truth.len().min(alt.len());
        let series: Vec<(f64, f64)> = (0..shared)
            .map(|j| {
                let u = &truth.states()[j];
                let v = &alt.states()[j];
                let diff: f64 = u
                    .values()
                    .iter()
                    .zip(v.values())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let norm: f64 = u.values().iter().map(|a| a * a).sum::<f64>().sqrt();
                (truth.times()[j], diff / norm.max(1e-12))
            })
            .collect();
        no_filter_error_series = Some(series);
        learned
            .timings
            .push(("no_filter_baseline".into(), start.elapsed().as_secs_f64()));
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        config_hash: cfg.content_hash(),
        relative_error_series,
        hamiltonian_series,
        deviation_series,
        align_constant: align.constant,
        diverged: truth_diverged || recon_diverged,
        diagnostics,
        stability,
        kn_empirical,
        model: learned.model,
        truth_trajectory: truth,
        reconstructed_trajectory: recon,
        pair_count: learned.pairs.count(),
        outside_dropped: learned.pairs.provenance().outside_dropped,
        dropped_bursts: learned.dropped_bursts,
        exited_bursts: learned.exited_bursts,
        underdetermined: learned.underdetermined,
        pairs: learned.pairs,
        no_filter_error_series,
        timings: learned.timings,
    })
}

fn integrate_truth(
    cfg: &ExperimentConfig,
    system: &HamiltonianSystem,
    u0: &StateVector,
) -> Result<(Trajectory, bool), hamlearn::Error> {
    if !cfg.fine_truth {
        return integrate_capped(system, u0, cfg.eval_step, cfg.horizon);
    }
    // Fine-step reference decimated back onto the evaluation grid.
    let refine = 10usize;
    let fine_step = cfg.eval_step / refine as f64;
    let (fine, diverged) = integrate_capped(system, u0, fine_step, cfg.horizon)?;
    let times: Vec<f64> = fine
        .times()
        .iter()
        .step_by(refine)
        .enumerate()
        .map(|(j, _)| j as f64 * cfg.eval_step)
        .collect();
    let states: Vec<StateVector> = fine.states().iter().step_by(refine).cloned().collect();
    Ok((Trajectory::new(times, states)?, diverged))
}

/// Comparison of the structure-preserving fit against the direct
/// right-hand-side baseline on identical data.
pub struct ComparisonReport {
    pub sp: ExperimentReport,
    pub nonsp_error_series: Vec<(f64, f64)>,
    pub nonsp_defect: f64,
    pub sp_defect: f64,
    pub nonsp_diverged: bool,
}

pub fn run_nonsp_comparison(cfg: &ExperimentConfig) -> Result<ComparisonReport, RunError> {
    if !cfg.baselines.nonsp {
        return Err(RunError::Config(
            "the non-SP comparison requires `baselines.nonsp = true`".into(),
        ));
    }
    let sp = run_experiment_in_memory(cfg)?;
    // Clamped evaluation so the baseline trajectory can leave the box, like
    // the SP comparison run.
    let basis = sp.model.basis().clone().with_policy(DomainPolicy::Clamp);
    let nonsp = fit_nonsp(&sp.pairs, &basis).map_err(|source| RunError::Stage {
        stage: "solve",
        source,
    })?;

    let u0 = StateVector::new(cfg.test_initial_state.clone())
        .map_err(|e| RunError::Config(e.to_string()))?;
    let system = cfg.system()?;
    let field = nonsp.field_fn();
    let nonsp_system = HamiltonianSystem::new(
        "nonsp",
        system.dim_d(),
        system.default_domain().clone(),
        |_x: &[f64]| f64::NAN, // the baseline has no Hamiltonian
        move |x: &[f64], out: &mut [f64]| field(x, out),
    )
    .map_err(|source| RunError::Stage {
        stage: "simulate",
        source,
    })?;
    let (nonsp_traj, nonsp_diverged) =
        integrate_capped(&nonsp_system, &u0, cfg.eval_step, cfg.horizon).map_err(|source| {
            RunError::Stage {
                stage: "simulate",
                source,
            }
        })?;

    let truth = &sp.truth_trajectory;
    let shared = truth.len().min(nonsp_traj.len());
    let nonsp_error_series: Vec<(f64, f64)> = (0..shared)
        .map(|j| {
            let u = &truth.states()[j];
            let v = &nonsp_traj.states()[j];
            let diff: f64 = u
                .values()
                .iter()
                .zip(v.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let norm: f64 = u.values().iter().map(|a| a * a).sum::<f64>().sqrt();
            (truth.times()[j], diff / norm.max(1e-12))
        })
        .collect();

    let recon_system = sp.model.reconstructed_system_with(DomainPolicy::Clamp);
    let sp_defect = symplectic_defect(
        |x: &[f64], out: &mut [f64]| recon_system.rhs_into(x, out),
        system.default_domain(),
        100,
    )
    .map_err(|source| RunError::Stage {
        stage: "diagnostics",
        source,
    })?;
    let nonsp_defect = symplectic_defect(
        |x: &[f64], out: &mut [f64]| nonsp_system.rhs_into(x, out),
        system.default_domain(),
        100,
    )
    .map_err(|source| RunError::Stage {
        stage: "diagnostics",
        source,
    })?;

    let comparison = ComparisonReport {
        sp,
        nonsp_error_series,
        nonsp_defect,
        sp_defect,
        nonsp_diverged,
    };
    emit_comparison(&comparison, &cfg.output_dir)?;
    Ok(comparison)
}

/// Integrate the learned system at each step size and record the deviation
/// norms and their observed orders.
pub fn run_convergence_study(
    cfg: &ExperimentConfig,
    steps: &[f64],
) -> Result<ConvergenceStudy, RunError> {
    if steps.is_empty() {
        return Err(RunError::Config("need at least one step size".into()));
    }
    if steps.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(RunError::Config("step sizes must be positive".into()));
    }
    if steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(RunError::Config(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    let learned = learn(cfg, None)?;
    let u0 = StateVector::new(cfg.test_initial_state.clone())
        .map_err(|e| RunError::Config(e.to_string()))?;
    let recon = learned.model.reconstructed_system_with(DomainPolicy::Clamp);

    let mut linf = Vec::with_capacity(steps.len());
    let mut l2 = Vec::with_capacity(steps.len());
    let mut tv = Vec::with_capacity(steps.len());
    for &tau in steps {
        let traj = recon
            .integrate(&u0, tau, cfg.horizon)
            .map_err(|source| RunError::Stage {
                stage: "simulate",
                source,
            })?;
        let dev = hamiltonian_deviation(&traj, |s| recon.hamiltonian_raw(s.values()));
        let sup = dev.iter().fold(0.0_f64, |m, &(_, d)| m.max(d.abs()));
        // Trapezoidal L2 norm over [0, horizon].
        let mut sq = 0.0;
        for w in dev.windows(2) {
            sq += 0.5 * (w[0].1 * w[0].1 + w[1].1 * w[1].1) * (w[1].0 - w[0].0);
        }
        let total_variation: f64 = dev.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum();
        linf.push(sup);
        l2.push(sq.sqrt());
        tv.push(total_variation);
    }
    let orders = |errs: &[f64]| -> Vec<f64> {
        errs.windows(2)
            .zip(steps.windows(2))
            .map(|(e, s)| (e[0] / e[1]).ln() / (s[0] / s[1]).ln())
            .collect()
    };
    let study = ConvergenceStudy {
        config_hash: cfg.content_hash(),
        steps: steps.to_vec(),
        linf_orders: orders(&linf),
        l2_orders: orders(&l2),
        tv_orders: orders(&tv),
        linf,
        l2,
        tv,
    };
    emit_convergence(&study, &cfg.output_dir)?;
    Ok(study)
}
