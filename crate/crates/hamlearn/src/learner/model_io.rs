//! Model files: a line-based record with the basis descriptor, solver
//! report, provenance hash and the coefficient list at 17 significant
//! digits, so loading reproduces the model bitwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::basis::{DomainBox, DomainPolicy, TotalDegreeBasis};
use crate::error::{Error, Result};

use super::model::HamiltonianModel;
use super::problem::SolverReport;

const MAGIC: &str = "hamlearn-model v1";

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn floats(vs: &[f64]) -> String {
    vs.iter().map(|v| full(*v)).collect::<Vec<_>>().join(" ")
}

/// Serialize a model to the structured-text record.
pub fn write_model(path: &Path, model: &HamiltonianModel) -> Result<()> {
    let basis = model.basis();
    let rep = model.report();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    writeln!(out, "basis.degree = {}", basis.degree()).unwrap();
    writeln!(out, "basis.dim = {}", basis.dim()).unwrap();
    writeln!(out, "basis.ordering = graded_lex").unwrap();
    writeln!(
        out,
        "basis.policy = {}",
        match basis.policy() {
            DomainPolicy::Strict => "strict",
            DomainPolicy::Clamp => "clamp",
        }
    )
    .unwrap();
    writeln!(out, "basis.domain.lower = {}", floats(basis.domain().lower())).unwrap();
    writeln!(out, "basis.domain.upper = {}", floats(basis.domain().upper())).unwrap();
    writeln!(out, "solver.rank = {}", rep.rank).unwrap();
    writeln!(out, "solver.truncated = {}", rep.truncated).unwrap();
    writeln!(out, "solver.eig_min = {}", full(rep.eig_min)).unwrap();
    writeln!(out, "solver.eig_max = {}", full(rep.eig_max)).unwrap();
    writeln!(out, "solver.rel_tol = {}", full(rep.rel_tol)).unwrap();
    writeln!(out, "solver.residual = {}", full(rep.residual)).unwrap();
    writeln!(out, "provenance.pairs = {}", model.provenance()).unwrap();
    writeln!(out, "coefficients = {}", model.coefficients().len()).unwrap();
    for c in model.coefficients() {
        out.push_str(&full(*c));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Load a model file written by [`write_model`].
pub fn read_model(path: &Path) -> Result<HamiltonianModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(parse_err(path, 1, format!("expected `{MAGIC}` header"))),
    }
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    let mut coeff_count: Option<usize> = None;
    let mut coeff_line = 0usize;
    for (i, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, i + 1, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if key == "coefficients" {
            coeff_count = Some(
                value
                    .parse()
                    .map_err(|_| parse_err(path, i + 1, "bad coefficient count"))?,
            );
            coeff_line = i + 1;
            break;
        }
        kv.insert(key.to_string(), value.to_string());
    }
    let coeff_count =
        coeff_count.ok_or_else(|| parse_err(path, coeff_line, "missing `coefficients`"))?;

    let get = |key: &str| -> Result<&String> {
        kv.get(key)
            .ok_or_else(|| parse_err(path, 0, format!("missing key `{key}`")))
    };
    let degree: u32 = get("basis.degree")?
        .parse()
        .map_err(|_| parse_err(path, 0, "bad basis.degree"))?;
    let dim: usize = get("basis.dim")?
        .parse()
        .map_err(|_| parse_err(path, 0, "bad basis.dim"))?;
    if get("basis.ordering")?.as_str() != "graded_lex" {
        return Err(parse_err(path, 0, "unsupported basis ordering"));
    }
    let policy = match get("basis.policy")?.as_str() {
        "strict" => DomainPolicy::Strict,
        "clamp" => DomainPolicy::Clamp,
        other => return Err(parse_err(path, 0, format!("unknown policy `{other}`"))),
    };
    let parse_floats = |key: &str| -> Result<Vec<f64>> {
        get(key)?
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(path, 0, format!("bad float in `{key}`")))
            })
            .collect()
    };
    let lower = parse_floats("basis.domain.lower")?;
    let upper = parse_floats("basis.domain.upper")?;
    if lower.len() != dim || upper.len() != dim {
        return Err(parse_err(path, 0, "domain bounds disagree with basis.dim"));
    }
    let basis = TotalDegreeBasis::new(degree, DomainBox::new(lower, upper)?)?.with_policy(policy);

    let parse_usize = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| parse_err(path, 0, format!("bad integer in `{key}`")))
    };
    let parse_f64 = |key: &str| -> Result<f64> {
        get(key)?
            .parse()
            .map_err(|_| parse_err(path, 0, format!("bad float in `{key}`")))
    };
    let report = SolverReport {
        rank: parse_usize("solver.rank")?,
        truncated: parse_usize("solver.truncated")?,
        eig_min: parse_f64("solver.eig_min")?,
        eig_max: parse_f64("solver.eig_max")?,
        rel_tol: parse_f64("solver.rel_tol")?,
        residual: parse_f64("solver.residual")?,
    };
    let provenance = get("provenance.pairs")?.clone();

    let mut coefficients = Vec::with_capacity(coeff_count);
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        coefficients.push(
            line.parse::<f64>()
                .map_err(|_| parse_err(path, i + 1, "bad coefficient"))?,
        );
    }
    if coefficients.len() != coeff_count {
        return Err(parse_err(
            path,
            coeff_line,
            format!(
                "expected {coeff_count} coefficients, found {}",
                coefficients.len()
            ),
        ));
    }
    HamiltonianModel::from_parts(coefficients, basis, report, provenance)
}
