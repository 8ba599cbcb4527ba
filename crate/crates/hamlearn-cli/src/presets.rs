//! Named experiment recipes mirroring the five benchmark studies.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::config::{
    BaselineFlags, DenoiseSettings, DerivativeMethodName, ExperimentConfig, RunError,
};

/// Available preset names, in the benchmark order.
pub fn preset_names() -> [&'static str; 5] {
    [
        "pendulum",
        "exp_quartic",
        "henon_heiles",
        "cherry",
        "double_pendulum",
    ]
}

/// One-line descriptions for the `presets` listing.
pub fn preset_summary(name: &str) -> &'static str {
    match name {
        "pendulum" => "single pendulum, 8% noise, degree 6, de-noising filter (M=500, J=40)",
        "exp_quartic" => "exponential quartic Hamiltonian, noiseless, degree 6 (M=300, J=2)",
        "henon_heiles" => "Henon-Heiles, noiseless, degree 3 (M=500, J=2)",
        "cherry" => "Cherry system, noiseless, degree 3 (M=500, J=2)",
        "double_pendulum" => {
            "double pendulum, degree 15, M=20000 -- long-running (dense 3875x3875 Gram)"
        }
        _ => "",
    }
}

/// Build the named preset.
pub fn preset(name: &str) -> Result<ExperimentConfig, RunError> {
    let cfg = match name {
        "pendulum" => ExperimentConfig {
            system: "pendulum".into(),
            degree: 6,
            trajectories: 500,
            steps_per_burst: 40,
            dt: 0.02,
            noise_amplitude: 0.08,
            denoise: Some(DenoiseSettings {
                degree: 5,
                apply_filter: true,
            }),
            derivative_method: DerivativeMethodName::Lsfit,
            test_initial_state: vec![-3.876, -1.193],
            horizon: 20.0,
            eval_step: 1e-3,
            seed: 6,
            baselines: BaselineFlags {
                nonsp: true,
                no_filter: true,
            },
            stability_r: 1.0,
            output_dir: PathBuf::from("out/pendulum"),
            fine_ratio: 10_000,
            restrict_to_box: true,
            diagnostics: true,
            fine_truth: false,
        },
        "exp_quartic" => ExperimentConfig {
            system: "exp_quartic".into(),
            degree: 6,
            trajectories: 300,
            steps_per_burst: 2,
            dt: 0.05,
            noise_amplitude: 0.0,
            denoise: None,
            derivative_method: DerivativeMethodName::CentralDiff,
            test_initial_state: vec![0.6, 0.6],
            horizon: 20.0,
            eval_step: 1e-3,
            seed: 2,
            baselines: BaselineFlags {
                nonsp: true,
                no_filter: false,
            },
            stability_r: 1.0,
            output_dir: PathBuf::from("out/exp_quartic"),
            fine_ratio: 10_000,
            restrict_to_box: true,
            diagnostics: true,
            fine_truth: false,
        },
        "henon_heiles" => ExperimentConfig {
            system: "henon_heiles".into(),
            degree: 3,
            trajectories: 500,
            steps_per_burst: 2,
            dt: 0.02,
            noise_amplitude: 0.0,
            denoise: None,
            derivative_method: DerivativeMethodName::CentralDiff,
            test_initial_state: vec![0.3, -0.25, 0.2, -0.25],
            horizon: 10.0,
            eval_step: 1e-3,
            seed: 3,
            baselines: BaselineFlags::default(),
            stability_r: 1.0,
            output_dir: PathBuf::from("out/henon_heiles"),
            fine_ratio: 10_000,
            restrict_to_box: true,
            diagnostics: true,
            fine_truth: false,
        },
        "cherry" => ExperimentConfig {
            system: "cherry".into(),
            degree: 3,
            trajectories: 500,
            steps_per_burst: 2,
            dt: 0.02,
            noise_amplitude: 0.0,
            denoise: None,
            derivative_method: DerivativeMethodName::CentralDiff,
            test_initial_state: vec![-0.05, 0.1, 0.15, 0.1],
            horizon: 10.0,
            eval_step: 1e-3,
            seed: 4,
            baselines: BaselineFlags::default(),
            stability_r: 1.0,
            output_dir: PathBuf::from("out/cherry"),
            fine_ratio: 10_000,
            restrict_to_box: true,
            diagnostics: true,
            fine_truth: false,
        },
        // The base case of the double-pendulum study. The Gram matrix is
        // dense 3875 x 3875 at degree 15, so expect a multi-minute run;
        // diagnostics are disabled, they would double the cost.
        "double_pendulum" => ExperimentConfig {
            system: "double_pendulum".into(),
            degree: 15,
            trajectories: 20_000,
            steps_per_burst: 2,
            dt: 0.02,
            noise_amplitude: 0.0,
            denoise: None,
            derivative_method: DerivativeMethodName::CentralDiff,
            test_initial_state: vec![0.0, 0.0, PI / 6.0, PI / 4.0],
            horizon: 20.0,
            eval_step: 1e-3,
            seed: 5,
            baselines: BaselineFlags::default(),
            stability_r: 1.0,
            output_dir: PathBuf::from("out/double_pendulum"),
            fine_ratio: 10_000,
            restrict_to_box: true,
            diagnostics: false,
            fine_truth: false,
        },
        other => {
            return Err(RunError::Config(format!(
                "unknown preset `{other}`; available: {}",
                preset_names().join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in preset_names() {
            let cfg = preset(name).expect(name);
            assert_eq!(cfg.system, name);
            assert!(!preset_summary(name).is_empty());
        }
        assert!(preset("nope").is_err());
    }
}
