//! Report structures and plot-ready output files. All files of one run share
//! the config hash in their names; identical configs rewrite identical
//! bytes. Timings are printed to the console, never into files, so reruns
//! stay bitwise reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hamlearn::{
    write_model, write_pairs, write_trajectories, DataPairSet, DiagnosticsReport,
    HamiltonianModel, StabilityDiagnostic, Trajectory,
};

use crate::config::{ExperimentConfig, RunError};
use crate::runner::ComparisonReport;

/// Everything one experiment run produced.
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// `(t, ||u~ - u|| / ||u||)` on the shared time grid.
    pub relative_error_series: Vec<(f64, f64)>,
    /// `(t, H(u(t)), H~(u~(t)) + C_align)`.
    pub hamiltonian_series: Vec<(f64, f64, f64)>,
    /// `(t, H~(u~(t)) - H~(u~(0)))`.
    pub deviation_series: Vec<(f64, f64)>,
    /// Quotient-space alignment constant.
    pub align_constant: f64,
    /// True when either simulation stopped early on non-finite values.
    pub diverged: bool,
    pub diagnostics: Option<DiagnosticsReport>,
    pub stability: Option<StabilityDiagnostic>,
    /// Kernel bound evaluated on the training samples themselves.
    pub kn_empirical: Option<f64>,
    pub model: HamiltonianModel,
    pub truth_trajectory: Trajectory,
    pub reconstructed_trajectory: Trajectory,
    pub pairs: DataPairSet,
    pub pair_count: usize,
    pub outside_dropped: usize,
    pub dropped_bursts: usize,
    pub exited_bursts: usize,
    pub underdetermined: bool,
    /// Error series of the no-filter baseline, when requested.
    pub no_filter_error_series: Option<Vec<(f64, f64)>>,
    /// Wall-clock seconds per stage (console only).
    pub timings: Vec<(String, f64)>,
}

/// Deviation norms of the learned system under step refinement.
pub struct ConvergenceStudy {
    pub config_hash: String,
    pub steps: Vec<f64>,
    pub linf: Vec<f64>,
    pub l2: Vec<f64>,
    pub tv: Vec<f64>,
    pub linf_orders: Vec<f64>,
    pub l2_orders: Vec<f64>,
    pub tv_orders: Vec<f64>,
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// Write a `(t, values...)` series in the trajectory-file layout
/// (trajectory_id column fixed to 0).
fn write_series(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), RunError> {
    let mut out = String::from("trajectory_id,time");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for row in rows {
        out.push('0');
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "skipped".into(),
    }
}

fn mean(series: &[(f64, f64)]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    series.iter().map(|&(_, v)| v).sum::<f64>() / series.len() as f64
}

fn summary_text(report: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str("# hamlearn experiment summary\n\n");
    writeln!(s, "config_hash = \"{}\"", report.config_hash).unwrap();
    writeln!(s, "diverged = {}", report.diverged).unwrap();
    writeln!(s, "pair_count = {}", report.pair_count).unwrap();
    writeln!(s, "outside_dropped = {}", report.outside_dropped).unwrap();
    writeln!(s, "dropped_bursts = {}", report.dropped_bursts).unwrap();
    writeln!(s, "exited_bursts = {}", report.exited_bursts).unwrap();
    writeln!(s, "underdetermined = {}", report.underdetermined).unwrap();
    writeln!(s, "align_constant = {}", report.align_constant).unwrap();
    writeln!(s, "provenance_hash = \"{}\"", report.model.provenance()).unwrap();
    s.push('\n');

    let rep = report.model.report();
    s.push_str("[solver]\n");
    writeln!(s, "rank = {}", rep.rank).unwrap();
    writeln!(s, "truncated = {}", rep.truncated).unwrap();
    writeln!(s, "eig_min = {}", rep.eig_min).unwrap();
    writeln!(s, "eig_max = {}", rep.eig_max).unwrap();
    writeln!(s, "residual = {}", rep.residual).unwrap();
    s.push('\n');

    s.push_str("[metrics]\n");
    let final_err = report.relative_error_series.last().map(|&(_, v)| v);
    let max_err = report
        .relative_error_series
        .iter()
        .fold(0.0_f64, |m, &(_, v)| m.max(v));
    writeln!(s, "relative_error_mean = {}", mean(&report.relative_error_series)).unwrap();
    writeln!(s, "relative_error_final = {}", fmt_opt(final_err)).unwrap();
    writeln!(s, "relative_error_max = {max_err}").unwrap();
    let dev_sup = report
        .deviation_series
        .iter()
        .fold(0.0_f64, |m, &(_, v)| m.max(v.abs()));
    writeln!(s, "deviation_sup = {dev_sup}").unwrap();
    if let Some(series) = &report.no_filter_error_series {
        writeln!(s, "no_filter_relative_error_mean = {}", mean(series)).unwrap();
    }
    s.push('\n');

    s.push_str("[diagnostics]\n");
    match &report.diagnostics {
        Some(d) => {
            writeln!(s, "a_minus_i_norm = {}", d.a_minus_i_norm).unwrap();
            writeln!(s, "best_approx_error = {}", d.best_approx_error).unwrap();
            writeln!(s, "alignment_error = {}", d.alignment_error).unwrap();
            writeln!(s, "symplectic_defect = {}", d.symplectic_defect).unwrap();
            writeln!(s, "truncation_level = {}", d.truncation_level).unwrap();
        }
        None => {
            s.push_str("computed = false\n");
        }
    }
    s.push('\n');

    s.push_str("[stability]\n");
    match &report.stability {
        Some(st) => {
            writeln!(s, "kn_grid = {}", st.kn_estimate).unwrap();
            writeln!(s, "kn_empirical = {}", fmt_opt(report.kn_empirical)).unwrap();
            writeln!(s, "lambda = {}", st.lambda).unwrap();
            writeln!(s, "threshold = {}", st.threshold).unwrap();
            writeln!(s, "satisfied = {}", st.satisfied).unwrap();
            writeln!(s, "beta_delta = {}", st.beta_delta).unwrap();
            writeln!(
                s,
                "failure_probability_bound = {}",
                st.failure_probability_bound
            )
            .unwrap();
        }
        None => {
            s.push_str("computed = false\n");
        }
    }
    s.push('\n');

    s.push_str("[config]\n");
    s.push_str(&report.config.to_toml_string());
    s
}

/// Files written atomically: everything lands in a temp directory first and
/// is renamed into place, so a failed run leaves no partial outputs.
struct Emitter {
    tmp: PathBuf,
    dir: PathBuf,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl Emitter {
    fn new(dir: &Path, hash: &str) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let tmp = dir.join(format!(".tmp-{hash}"));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| io_err(&tmp, e))?;
        }
        fs::create_dir_all(&tmp).map_err(|e| io_err(&tmp, e))?;
        Ok(Self {
            tmp,
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let tmp_path = self.tmp.join(name);
        self.staged.push((tmp_path.clone(), self.dir.join(name)));
        tmp_path
    }

    fn finish(self) -> Result<(), RunError> {
        for (from, to) in &self.staged {
            fs::rename(from, to).map_err(|e| io_err(to, e))?;
        }
        fs::remove_dir_all(&self.tmp).map_err(|e| io_err(&self.tmp, e))?;
        Ok(())
    }
}

impl Drop for Emitter {
    fn drop(&mut self) {
        // Best-effort cleanup when finish() was never reached.
        let _ = fs::remove_dir_all(&self.tmp);
    }
}

/// Write the run's series files, summary, pair set and model file.
pub fn emit_outputs(report: &ExperimentReport, dir: &Path) -> Result<(), RunError> {
    let hash = &report.config_hash;
    let mut em = Emitter::new(dir, hash)?;

    let path = em.path(&format!("truth_{hash}.csv"));
    write_trajectories(&path, std::slice::from_ref(&report.truth_trajectory))
        .map_err(|e| RunError::Io(e.to_string()))?;
    let path = em.path(&format!("reconstruction_{hash}.csv"));
    write_trajectories(&path, std::slice::from_ref(&report.reconstructed_trajectory))
        .map_err(|e| RunError::Io(e.to_string()))?;

    let rows: Vec<Vec<f64>> = report
        .relative_error_series
        .iter()
        .map(|&(t, v)| vec![t, v])
        .collect();
    write_series(&em.path(&format!("error_{hash}.csv")), &["rel_error"], &rows)?;

    let rows: Vec<Vec<f64>> = report
        .hamiltonian_series
        .iter()
        .map(|&(t, a, b)| vec![t, a, b])
        .collect();
    write_series(
        &em.path(&format!("hamiltonian_{hash}.csv")),
        &["h_true", "h_model_aligned"],
        &rows,
    )?;

    let rows: Vec<Vec<f64>> = report
        .deviation_series
        .iter()
        .map(|&(t, v)| vec![t, v])
        .collect();
    write_series(
        &em.path(&format!("deviation_{hash}.csv")),
        &["delta_h"],
        &rows,
    )?;

    if let Some(series) = &report.no_filter_error_series {
        let rows: Vec<Vec<f64>> = series.iter().map(|&(t, v)| vec![t, v]).collect();
        write_series(
            &em.path(&format!("error_nofilter_{hash}.csv")),
            &["rel_error"],
            &rows,
        )?;
    }

    let path = em.path(&format!("training_pairs_{hash}.csv"));
    write_pairs(&path, &report.pairs).map_err(|e| RunError::Io(e.to_string()))?;

    let path = em.path(&format!("model_{hash}.txt"));
    write_model(&path, &report.model).map_err(|e| RunError::Io(e.to_string()))?;

    let path = em.path(&format!("summary_{hash}.txt"));
    fs::write(&path, summary_text(report)).map_err(|e| io_err(&path, e))?;

    em.finish()
}

/// Emit the SP run plus the paired baseline series and defect numbers.
pub fn emit_comparison(cmp: &ComparisonReport, dir: &Path) -> Result<(), RunError> {
    emit_outputs(&cmp.sp, dir)?;
    let hash = &cmp.sp.config_hash;
    let mut em = Emitter::new(dir, &format!("{hash}-cmp"))?;
    let rows: Vec<Vec<f64>> = cmp
        .nonsp_error_series
        .iter()
        .map(|&(t, v)| vec![t, v])
        .collect();
    write_series(
        &em.path(&format!("error_nonsp_{hash}.csv")),
        &["rel_error"],
        &rows,
    )?;
    let mut s = String::new();
    s.push_str("# non-structure-preserving baseline comparison\n");
    writeln!(s, "config_hash = \"{hash}\"").unwrap();
    writeln!(s, "sp_symplectic_defect = {}", cmp.sp_defect).unwrap();
    writeln!(s, "nonsp_symplectic_defect = {}", cmp.nonsp_defect).unwrap();
    writeln!(s, "nonsp_diverged = {}", cmp.nonsp_diverged).unwrap();
    writeln!(
        s,
        "sp_relative_error_mean = {}",
        mean(&cmp.sp.relative_error_series)
    )
    .unwrap();
    writeln!(
        s,
        "nonsp_relative_error_mean = {}",
        mean(&cmp.nonsp_error_series)
    )
    .unwrap();
    let path = em.path(&format!("comparison_{hash}.txt"));
    fs::write(&path, s).map_err(|e| io_err(&path, e))?;
    em.finish()
}

/// Emit the convergence table.
pub fn emit_convergence(study: &ConvergenceStudy, dir: &Path) -> Result<(), RunError> {
    let hash = &study.config_hash;
    let mut em = Emitter::new(dir, &format!("{hash}-conv"))?;
    let mut out = String::from("tau,linf,linf_order,l2,l2_order,tv,tv_order\n");
    for i in 0..study.steps.len() {
        let ord = |v: &[f64]| {
            if i == 0 {
                "--".to_string()
            } else {
                format!("{}", v[i - 1])
            }
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            study.steps[i],
            study.linf[i],
            ord(&study.linf_orders),
            study.l2[i],
            ord(&study.l2_orders),
            study.tv[i],
            ord(&study.tv_orders),
        )
        .unwrap();
    }
    let path = em.path(&format!("convergence_{hash}.csv"));
    fs::write(&path, out).map_err(|e| io_err(&path, e))?;
    em.finish()
}
