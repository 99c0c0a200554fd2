//! Timing sweep over strategies, step counts, worker counts and chunk sizes.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{FodeError, Result};
use crate::parallel::{solve_block_parallel_with, BlockOptions};
use crate::problem::{FractionalProblem, GridSpec};
use crate::serial::Trajectory;
use crate::strategy::{self, Strategy, StrategyKind};
use crate::systems::NamedSystem;

use super::config::Settings;

/// Largest N used for the projected-time line when none is given.
pub const DEFAULT_PROJECT_STEPS: usize = 3_000_000;
pub const DEFAULT_REPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub strategy: StrategyKind,
    pub n_steps: usize,
    pub workers: usize,
    pub chunk: Option<usize>,
    /// Median over the timed repetitions (warmup excluded).
    pub wall_time_s: f64,
    pub repetitions: usize,
    /// Serial median / this median, same N. `None` without a serial baseline.
    pub speedup_vs_serial: Option<f64>,
    /// Per-worker idle steps, block strategy only.
    pub idle_steps: Vec<u64>,
    /// Every repetition produced a bitwise-identical trajectory.
    pub repeatable: bool,
    pub failure: Option<String>,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "strategy,N,P,chunk,wall_time_s,repetitions,speedup_vs_serial,idle_steps,repeatable,status";

    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }

    pub fn to_csv_row(&self) -> String {
        let mut s = String::new();
        let chunk = self.chunk.map(|c| c.to_string()).unwrap_or_default();
        let speedup = self.speedup_vs_serial.map(|v| format!("{v:.4}")).unwrap_or_default();
        let idle: Vec<String> = self.idle_steps.iter().map(u64::to_string).collect();
        let status = match &self.failure {
            None => "ok".to_string(),
            Some(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
        };
        let wall = if self.ok() { format!("{:.6e}", self.wall_time_s) } else { String::new() };
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.n_steps,
            self.workers,
            chunk,
            wall,
            self.repetitions,
            speedup,
            idle.join(";"),
            self.repeatable,
            status
        );
        s
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// O(N²) extrapolation of a measured time.
pub fn projected_time(n_measured: usize, seconds: f64, n_target: usize) -> f64 {
    let r = n_target as f64 / n_measured as f64;
    seconds * r * r
}

fn run_once(problem: &FractionalProblem, grid: GridSpec, strategy: Strategy) -> Result<(Trajectory, Vec<u64>)> {
    match strategy {
        Strategy::Block { workers } => {
            let (t, stats) = solve_block_parallel_with(problem, grid, &BlockOptions::new(workers))?;
            Ok((t, stats.workers.iter().map(|w| w.idle_steps).collect()))
        }
        s => Ok((strategy::solve(problem, grid, s)?, Vec::new())),
    }
}

/// Times one cell: a discarded warmup run, then `reps` timed runs. A
/// numerical failure ends the cell and is recorded, not returned.
pub fn time_cell(problem: &FractionalProblem, grid: GridSpec, strategy: Strategy, reps: usize) -> BenchRecord {
    let mut rec = BenchRecord {
        strategy: strategy.kind(),
        n_steps: grid.n_steps(),
        workers: strategy.workers(),
        chunk: strategy.chunk(),
        wall_time_s: f64::NAN,
        repetitions: reps.max(1),
        speedup_vs_serial: None,
        idle_steps: Vec::new(),
        repeatable: true,
        failure: None,
    };
    let first = match run_once(problem, grid, strategy) {
        Ok((t, idle)) => {
            rec.idle_steps = idle;
            t
        }
        Err(e) => {
            rec.failure = Some(e.to_string());
            return rec;
        }
    };
    let mut times = Vec::with_capacity(rec.repetitions);
    for _ in 0..rec.repetitions {
        let start = Instant::now();
        let run = run_once(problem, grid, strategy);
        let elapsed = start.elapsed().as_secs_f64();
        match run {
            Ok((t, _)) => {
                rec.repeatable &= t.bitwise_eq(&first);
                times.push(elapsed.max(f64::MIN_POSITIVE));
            }
            Err(e) => {
                rec.failure = Some(e.to_string());
                return rec;
            }
        }
    }
    rec.wall_time_s = median(&mut times);
    rec
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub system: NamedSystem,
    pub alpha: f64,
    pub t_end: f64,
    pub y0: Option<Vec<f64>>,
    pub strategies: Vec<StrategyKind>,
    pub steps: Vec<usize>,
    pub workers: Vec<usize>,
    pub chunks: Vec<usize>,
    pub reps: usize,
    pub project_steps: usize,
}

impl BenchSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let spec = BenchSpec {
            system: s.system()?,
            alpha: s.require("alpha")?,
            t_end: s.parse("tmax")?.unwrap_or(super::config::DEFAULT_T_END),
            y0: s.list("y0")?,
            strategies: s
                .list("strategy")?
                .unwrap_or_else(|| vec![StrategyKind::Serial, StrategyKind::Block, StrategyKind::Reduction]),
            steps: s.list("steps")?.unwrap_or_else(|| vec![10_000, 20_000]),
            workers: s.list("workers")?.unwrap_or_else(|| vec![1, 2, 4]),
            chunks: s.list("chunk")?.unwrap_or_else(|| vec![crate::parallel::DEFAULT_CHUNK]),
            reps: s.parse("reps")?.unwrap_or(DEFAULT_REPS),
            project_steps: s.parse("project-steps")?.unwrap_or(DEFAULT_PROJECT_STEPS),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.problem(self.alpha, self.t_end, self.y0.clone())?;
        if self.reps == 0 {
            return Err(FodeError::config("--reps must be at least 1"));
        }
        if let Some(&n) = self.steps.iter().find(|&&n| n == 0) {
            return Err(FodeError::config(format!("invalid step count {n}")));
        }
        if self.workers.contains(&0) || self.chunks.contains(&0) {
            return Err(FodeError::config("worker counts and chunk sizes must be at least 1"));
        }
        Ok(())
    }

    /// The parallel cells run for every N, after the serial baseline.
    pub fn cells(&self) -> Vec<Strategy> {
        let mut out = Vec::new();
        for kind in &self.strategies {
            match kind {
                StrategyKind::Serial => {}
                StrategyKind::Block => out.extend(self.workers.iter().map(|&w| Strategy::Block { workers: w })),
                StrategyKind::Reduction => {
                    for &w in &self.workers {
                        out.extend(self.chunks.iter().map(|&c| Strategy::Reduction { workers: w, chunk: c }));
                    }
                }
            }
        }
        out
    }
}

/// Runs the sweep cell by cell (sequentially, so cells do not disturb each
/// other's timings), handing each record to `sink` as soon as it is done.
pub fn run_bench(spec: &BenchSpec, mut sink: impl FnMut(&BenchRecord)) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    let problem = spec.system.problem(spec.alpha, spec.t_end, spec.y0.clone())?;
    let mut records = Vec::new();
    for &n in &spec.steps {
        let grid = GridSpec::new(spec.t_end, n)?;
        let mut serial = time_cell(&problem, grid, Strategy::Serial, spec.reps);
        let baseline = serial.ok().then_some(serial.wall_time_s);
        if baseline.is_some() {
            serial.speedup_vs_serial = Some(1.0);
        }
        sink(&serial);
        records.push(serial);
        for s in spec.cells() {
            if s.workers() > n {
                continue;
            }
            let mut rec = time_cell(&problem, grid, s, spec.reps);
            if rec.ok() {
                rec.speedup_vs_serial = baseline.map(|b| b / rec.wall_time_s);
            }
            sink(&rec);
            records.push(rec);
        }
    }
    Ok(records)
}

/// One line per strategy cell at the largest measured N.
pub fn projection_lines(records: &[BenchRecord], n_target: usize) -> Vec<String> {
    let Some(n_max) = records.iter().filter(|r| r.ok()).map(|r| r.n_steps).max() else {
        return Vec::new();
    };
    records
        .iter()
        .filter(|r| r.ok() && r.n_steps == n_max)
        .map(|r| {
            let chunk = r.chunk.map(|c| format!(" chunk={c}")).unwrap_or_default();
            format!(
                "projected {} P={}{} at N={}: {:.3e} s (O(N^2) from {:.3e} s at N={})",
                r.strategy,
                r.workers,
                chunk,
                n_target,
                projected_time(r.n_steps, r.wall_time_s, n_target),
                r.wall_time_s,
                r.n_steps
            )
        })
        .collect()
}
