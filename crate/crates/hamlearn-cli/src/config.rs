//! Experiment configuration: a flat TOML document with explicit keys.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Derivative estimation method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethodName {
    CentralDiff,
    Lsfit,
}

/// De-noising knobs (mirrors the library's `DenoiseConfig`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DenoiseSettings {
    pub degree: usize,
    #[serde(default = "default_true")]
    pub apply_filter: bool,
}

/// Optional baseline computations.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct BaselineFlags {
    #[serde(default)]
    pub nonsp: bool,
    #[serde(default)]
    pub no_filter: bool,
}

fn default_true() -> bool {
    true
}

fn default_fine_ratio() -> u32 {
    hamlearn::data::DEFAULT_FINE_RATIO
}

fn default_stability_r() -> f64 {
    1.0
}

fn default_eval_step() -> f64 {
    1e-3
}

/// One benchmark run, fully determined by these fields plus the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in system name.
    pub system: String,
    /// Polynomial total degree `n`.
    pub degree: u32,
    /// Number of trajectories `M`.
    pub trajectories: usize,
    /// Intervals per burst `J`.
    pub steps_per_burst: usize,
    /// Observation spacing.
    pub dt: f64,
    /// Relative multiplicative noise amplitude.
    #[serde(default)]
    pub noise_amplitude: f64,
    /// De-noising settings; required when `derivative_method = "lsfit"`.
    #[serde(default)]
    pub denoise: Option<DenoiseSettings>,
    pub derivative_method: DerivativeMethodName,
    /// Test initial state (p-block then q-block).
    pub test_initial_state: Vec<f64>,
    /// Simulation horizon for the truth/reconstruction comparison.
    pub horizon: f64,
    /// RK4 step for the comparison runs.
    #[serde(default = "default_eval_step")]
    pub eval_step: f64,
    pub seed: u64,
    #[serde(default)]
    pub baselines: BaselineFlags,
    #[serde(default = "default_stability_r")]
    pub stability_r: f64,
    pub output_dir: PathBuf,
    /// Reference-solver substep factor (data generation).
    #[serde(default = "default_fine_ratio")]
    pub fine_ratio: u32,
    /// Drop training pairs that leave the computational domain.
    #[serde(default = "default_true")]
    pub restrict_to_box: bool,
    /// Compute the error/stability diagnostics (heavy for very large bases).
    #[serde(default = "default_true")]
    pub diagnostics: bool,
    /// Integrate the truth at a 10x finer step for the comparison.
    #[serde(default)]
    pub fine_truth: bool,
}

/// Harness errors with their process exit codes: configuration problems exit
/// with 2, numerical/stage failures with 3.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Stage {
        stage: &'static str,
        source: hamlearn::Error,
    },
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config error: {msg}"),
            RunError::Stage { stage, source } => write!(f, "stage `{stage}` failed: {source}"),
            RunError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Stage { .. } | RunError::Io(_) => 3,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Resolve the built-in system, checking the dimensions.
    pub fn system(&self) -> Result<hamlearn::HamiltonianSystem, RunError> {
        let sys = hamlearn::builtin_system(&self.system)
            .map_err(|e| RunError::Config(e.to_string()))?;
        if self.test_initial_state.len() != sys.dim() {
            return Err(RunError::Config(format!(
                "test_initial_state has {} entries, system `{}` needs {}",
                self.test_initial_state.len(),
                self.system,
                sys.dim()
            )));
        }
        Ok(sys)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.system()?;
        if self.degree == 0 {
            return Err(RunError::Config("degree must be at least 1".into()));
        }
        if self.trajectories == 0 || self.steps_per_burst == 0 {
            return Err(RunError::Config(
                "trajectories and steps_per_burst must be positive".into(),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(RunError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(RunError::Config("noise_amplitude must be >= 0".into()));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(RunError::Config("horizon must be >= 0".into()));
        }
        if !(self.eval_step.is_finite() && self.eval_step > 0.0) {
            return Err(RunError::Config("eval_step must be positive".into()));
        }
        if !(self.stability_r.is_finite() && self.stability_r > 0.0) {
            return Err(RunError::Config("stability_r must be positive".into()));
        }
        if self.fine_ratio == 0 {
            return Err(RunError::Config("fine_ratio must be positive".into()));
        }
        match (self.derivative_method, &self.denoise) {
            (DerivativeMethodName::Lsfit, None) => {
                return Err(RunError::Config(
                    "derivative_method = \"lsfit\" requires a [denoise] section".into(),
                ));
            }
            (_, Some(d)) => {
                if d.degree == 0 || d.degree > self.steps_per_burst {
                    return Err(RunError::Config(format!(
                        "denoise degree must satisfy 1 <= Q <= steps_per_burst, got {}",
                        d.degree
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Hash identifying the run for output filenames. The output directory
    /// itself is excluded so relocating results does not rename them.
    pub fn content_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let text = canonical.to_toml_string();
        let digest = Sha256::digest(text.as_bytes());
        digest
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        crate::presets::preset("pendulum").unwrap()
    }

    #[test]
    fn toml_round_trip() {
        let cfg = base();
        let text = cfg.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.system, cfg.system);
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.content_hash(), cfg.content_hash());
    }

    #[test]
    fn hash_tracks_the_seed_but_not_the_output_dir() {
        let cfg = base();
        let mut reseeded = cfg.clone();
        reseeded.seed += 1;
        assert_ne!(cfg.content_hash(), reseeded.content_hash());
        let mut moved = cfg.clone();
        moved.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(cfg.content_hash(), moved.content_hash());
    }

    #[test]
    fn lsfit_requires_denoise() {
        let mut cfg = base();
        cfg.denoise = None;
        assert!(matches!(cfg.validate(), Err(RunError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{}\nbogus_key = 3\n", base().to_toml_string());
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(RunError::Config(_))
        ));
    }

    #[test]
    fn bad_initial_state_dimension_is_a_config_error() {
        let mut cfg = base();
        cfg.test_initial_state = vec![0.0; 4];
        assert!(matches!(cfg.validate(), Err(RunError::Config(_))));
    }
}
