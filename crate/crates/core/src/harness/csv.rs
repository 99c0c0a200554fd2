//! Trajectory CSV: header `t,y0,...,y{d-1}`, one row per grid point,
//! values with 17 significant digits, LF line endings.

use std::io::{self, Write};

use crate::error::{FodeError, Result};
use crate::serial::Trajectory;

pub fn trajectory_header(dim: usize) -> String {
    let mut h = String::from("t");
    for i in 0..dim {
        h.push_str(&format!(",y{i}"));
    }
    h
}

/// 17 significant digits: enough to reproduce any f64 exactly.
#[inline]
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{}", trajectory_header(traj.dim()))?;
    for n in 0..traj.len() {
        write!(out, "{:.16e}", traj.t(n))?;
        for v in traj.state(n) {
            write!(out, ",{v:.16e}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parsed trajectory CSV: grid times and row-major states.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub dim: usize,
    pub t: Vec<f64>,
    pub states: Vec<f64>,
}

impl TrajectoryTable {
    pub fn rows(&self) -> usize {
        self.t.len()
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }
}

pub fn parse_trajectory(text: &str) -> Result<TrajectoryTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FodeError::config("empty trajectory file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let dim = cols.len().saturating_sub(1);
    if dim == 0 || cols[0] != "t" || cols[1..].iter().enumerate().any(|(i, c)| *c != format!("y{i}")) {
        return Err(FodeError::config(format!("unexpected trajectory header '{header}'")));
    }
    let mut t = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.parse().ok())
                .ok_or_else(|| FodeError::config(format!("malformed trajectory row {}: '{line}'", i + 1)))
        };
        t.push(parse(fields.next())?);
        for _ in 0..dim {
            states.push(parse(fields.next())?);
        }
        if fields.next().is_some() {
            return Err(FodeError::config(format!("trajectory row {} has extra columns", i + 1)));
        }
    }
    Ok(TrajectoryTable { dim, t, states })
}
