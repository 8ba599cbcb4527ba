//! `hamlearn`: run the benchmark experiments from presets or config files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hamlearn_cli::config::{ExperimentConfig, RunError};
use hamlearn_cli::presets::{preset, preset_names, preset_summary};
use hamlearn_cli::runner::{run_convergence_study, run_experiment, run_nonsp_comparison};

#[derive(Parser)]
#[command(
    name = "hamlearn",
    about = "Structure-preserving identification of Hamiltonian systems from trajectory data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigSource {
    /// Path to a TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in preset (see `hamlearn presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigSource {
    fn resolve(&self) -> Result<ExperimentConfig, RunError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => ExperimentConfig::from_path(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => {
                return Err(RunError::Config(
                    "pass either --config <path> or --preset <name>".into(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap forbids this combination"),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment end to end and write its output files.
    Run {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Step-refinement study of the learned system's energy deviation.
    Converge {
        #[command(flatten)]
        source: ConfigSource,
        /// Comma-separated decreasing RK4 steps, e.g. "8e-3,4e-3,2e-3".
        #[arg(long)]
        steps: String,
    },
    /// Fit both the structure-preserving model and the direct
    /// right-hand-side baseline on the same data and compare.
    Compare {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// List the built-in presets, or print one as a TOML config.
    Presets {
        /// Preset to print.
        name: Option<String>,
    },
}

fn parse_steps(text: &str) -> Result<Vec<f64>, RunError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| RunError::Config(format!("bad step value `{t}`")))
        })
        .collect()
}

fn report_timings(timings: &[(String, f64)]) {
    for (name, secs) in timings {
        eprintln!("  {name:<18} {secs:8.3}s");
    }
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Run { source } => {
            let cfg = source.resolve()?;
            let report = run_experiment(&cfg)?;
            if report.underdetermined {
                eprintln!(
                    "warning: basis dimension exceeds the pair count; the fit is underdetermined"
                );
            }
            if report.diverged {
                eprintln!("warning: a simulated trajectory left the finite range early");
            }
            eprintln!(
                "run {} finished: {} pairs, outputs in {}",
                report.config_hash,
                report.pair_count,
                cfg.output_dir.display()
            );
            report_timings(&report.timings);
        }
        Command::Converge { source, steps } => {
            let cfg = source.resolve()?;
            let steps = parse_steps(&steps)?;
            let study = run_convergence_study(&cfg, &steps)?;
            eprintln!("convergence study {} finished:", study.config_hash);
            eprintln!("  tau        L_inf        order");
            for i in 0..study.steps.len() {
                let order = if i == 0 {
                    "   --".to_string()
                } else {
                    format!("{:5.2}", study.linf_orders[i - 1])
                };
                eprintln!("  {:<9.2e} {:<12.4e} {order}", study.steps[i], study.linf[i]);
            }
        }
        Command::Compare { source } => {
            let mut cfg = source.resolve()?;
            if !cfg.baselines.nonsp {
                // The subcommand is the explicit request for the baseline.
                cfg.baselines.nonsp = true;
            }
            let cmp = run_nonsp_comparison(&cfg)?;
            eprintln!("comparison {} finished:", cmp.sp.config_hash);
            eprintln!("  sp symplectic defect     {:.3e}", cmp.sp_defect);
            eprintln!("  nonsp symplectic defect  {:.3e}", cmp.nonsp_defect);
        }
        Command::Presets { name } => match name {
            Some(name) => {
                let cfg = preset(&name)?;
                print!("{}", cfg.to_toml_string());
            }
            None => {
                for name in preset_names() {
                    println!("{name:<16} {}", preset_summary(name));
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
