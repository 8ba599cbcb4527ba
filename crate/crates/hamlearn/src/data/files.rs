//! Delimited-text interchange format for trajectories and pair sets.
//!
//! One row per sample: `trajectory_id, time, p1..pd, q1..qd` and, for pair
//! files, the derivative entries `pdot1..pdotd, qdot1..qdotd`. Floats are
//! written in shortest round-trip form, so a write/read cycle is bitwise
//! exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::phase::{StateVector, Trajectory};

use super::pairs::DataPairSet;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn state_header(d: usize) -> String {
    let mut h = String::from("trajectory_id,time");
    for i in 1..=d {
        write!(h, ",p{i}").unwrap();
    }
    for i in 1..=d {
        write!(h, ",q{i}").unwrap();
    }
    h
}

fn deriv_header(d: usize) -> String {
    let mut h = String::new();
    for i in 1..=d {
        write!(h, ",pdot{i}").unwrap();
    }
    for i in 1..=d {
        write!(h, ",qdot{i}").unwrap();
    }
    h
}

/// Write bursts as delimited text, one row per sample.
pub fn write_trajectories(path: &Path, bursts: &[Trajectory]) -> Result<()> {
    let mut out = String::new();
    let d = bursts.first().map(|b| b.dim() / 2).unwrap_or(1);
    out.push_str(&state_header(d));
    out.push('\n');
    for (id, burst) in bursts.iter().enumerate() {
        for (j, s) in burst.states().iter().enumerate() {
            write!(out, "{id},{}", burst.times()[j]).unwrap();
            for v in s.values() {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Write a pair set, states followed by derivative estimates.
pub fn write_pairs(path: &Path, pairs: &DataPairSet) -> Result<()> {
    let d = pairs.dim() / 2;
    let mut out = String::new();
    out.push_str(&state_header(d));
    out.push_str(&deriv_header(d));
    out.push('\n');
    for k in 0..pairs.count() {
        write!(out, "{},{}", pairs.burst_id(k), pairs.time(k)).unwrap();
        for v in pairs.state(k) {
            write!(out, ",{v}").unwrap();
        }
        for v in pairs.derivative(k) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: format!("bad float `{tok}`"),
    })
}

/// Read a trajectory file, grouping rows by trajectory id (rows of one
/// trajectory must be contiguous and time-ordered).
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        reason: "missing header".into(),
    })?;
    let cols = header.split(',').count();
    if cols < 4 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("expected at least 4 columns, got {cols}"),
        });
    }
    let dim = cols - 2;
    let mut bursts: Vec<Trajectory> = Vec::new();
    let mut current_id: Option<String> = None;
    let mut times: Vec<f64> = Vec::new();
    let mut states: Vec<StateVector> = Vec::new();
    let mut flush = |times: &mut Vec<f64>, states: &mut Vec<StateVector>| -> Result<()> {
        if !times.is_empty() {
            bursts.push(Trajectory::new(
                std::mem::take(times),
                std::mem::take(states),
            )?);
        }
        Ok(())
    };
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != cols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("expected {cols} columns, got {}", toks.len()),
            });
        }
        let id = toks[0].trim().to_string();
        if current_id.as_deref() != Some(id.as_str()) {
            flush(&mut times, &mut states)?;
            current_id = Some(id);
        }
        times.push(parse_f64(path, i + 1, toks[1])?);
        let row: Result<Vec<f64>> = toks[2..2 + dim]
            .iter()
            .map(|t| parse_f64(path, i + 1, t))
            .collect();
        states.push(StateVector::new(row?)?);
    }
    flush(&mut times, &mut states)?;
    if bursts.is_empty() {
        return Err(Error::EmptyData(format!(
            "{} holds no trajectory rows",
            path.display()
        )));
    }
    Ok(bursts)
}

/// Read a pair file written by [`write_pairs`].
pub fn read_pairs(path: &Path) -> Result<DataPairSet> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        reason: "missing header".into(),
    })?;
    let cols = header.split(',').count();
    if cols < 6 || (cols - 2) % 2 != 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("pair files need 2 + 4d columns, got {cols}"),
        });
    }
    let dim = (cols - 2) / 2;
    let mut ids = Vec::new();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut derivs = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != cols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("expected {cols} columns, got {}", toks.len()),
            });
        }
        let id: u32 = toks[0].trim().parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: format!("bad trajectory id `{}`", toks[0]),
        })?;
        ids.push(id);
        times.push(parse_f64(path, i + 1, toks[1])?);
        for t in &toks[2..2 + dim] {
            states.push(parse_f64(path, i + 1, t)?);
        }
        for t in &toks[2 + dim..] {
            derivs.push(parse_f64(path, i + 1, t)?);
        }
    }
    if ids.is_empty() {
        return Err(Error::EmptyData(format!(
            "{} holds no pair rows",
            path.display()
        )));
    }
    DataPairSet::from_rows(dim, ids, times, states, derivs)
}
