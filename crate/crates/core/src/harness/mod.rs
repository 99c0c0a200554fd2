//! The `fode` command line: `solve`, `bench` and `verify`.
//!
//! Exit status: 0 on success, 1 when the solver (or a verify check) fails,
//! 2 for usage and configuration errors.

pub mod bench;
pub mod config;
pub mod csv;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{FodeError, Result};
use crate::strategy;
use crate::verify::run_verify_suite;

pub use bench::{run_bench, time_cell, BenchRecord, BenchSpec};
pub use config::{RunConfig, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "fode", version, about = "Fractional Adams-Bashforth-Moulton solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and write the trajectory as CSV.
    Solve(RunArgs),
    /// Time strategies over a grid of N, P and chunk sizes.
    Bench(RunArgs),
    /// Run the analytic convergence and strategy-equivalence checks.
    Verify(VerifyArgs),
}

/// Flags shared by `solve` and `bench`. For `bench`, `--strategy`,
/// `--steps`, `--workers` and `--chunk` take comma-separated lists.
#[derive(Args, Debug)]
struct RunArgs {
    /// Plain-text `key = value` file; flags override its entries.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// zero, constant, power-law, linear or hindmarsh-rose.
    #[arg(long, value_name = "NAME")]
    system: Option<String>,
    /// Comma-separated system parameters (beta, lambda, constant value, or the eight Hindmarsh-Rose constants).
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    params: Option<String>,
    /// Initial state, comma-separated; defaults per system.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    y0: Option<String>,
    /// Fractional order in (0, 1].
    #[arg(long, value_name = "REAL")]
    alpha: Option<String>,
    /// Final time T.
    #[arg(long, value_name = "REAL")]
    tmax: Option<String>,
    #[arg(long, value_name = "INT")]
    steps: Option<String>,
    /// serial, block or reduction.
    #[arg(long, value_name = "NAME")]
    strategy: Option<String>,
    #[arg(long, value_name = "INT")]
    workers: Option<String>,
    /// Reduction chunk size.
    #[arg(long, value_name = "INT")]
    chunk: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
    /// Timed repetitions per bench cell.
    #[arg(long, value_name = "INT")]
    reps: Option<String>,
    /// N for the projected O(N^2) bench time.
    #[arg(long, value_name = "INT")]
    project_steps: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Convergence report CSV; standard output when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| FodeError::config(format!("cannot read config {}: {e}", path.display())))?;
                Settings::parse_file(&text)?
            }
            None => Settings::default(),
        };
        s.set_opt("system", self.system.clone());
        s.set_opt("params", self.params.clone());
        s.set_opt("y0", self.y0.clone());
        s.set_opt("alpha", self.alpha.clone());
        s.set_opt("tmax", self.tmax.clone());
        s.set_opt("steps", self.steps.clone());
        s.set_opt("strategy", self.strategy.clone());
        s.set_opt("workers", self.workers.clone());
        s.set_opt("chunk", self.chunk.clone());
        s.set_opt("output", self.output.clone());
        s.set_opt("reps", self.reps.clone());
        s.set_opt("project-steps", self.project_steps.clone());
        Ok(s)
    }
}

fn exit_code(e: &FodeError) -> i32 {
    match e {
        FodeError::Config(_) | FodeError::Domain(_) | FodeError::Index { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn report(err: &mut dyn Write, e: &FodeError) -> i32 {
    let _ = match e {
        FodeError::Step { step, .. } => writeln!(err, "fode: solver failed at step {step}: {e}"),
        _ => writeln!(err, "fode: {e}"),
    };
    exit_code(e)
}

fn open_output<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(
            File::create(p).map_err(|e| FodeError::Io(format!("cannot create {}: {e}", p.display())))?,
        ),
        None => Box::new(stdout),
    })
}

/// Runs the CLI on `args` (including the program name) with the given
/// output streams and returns the exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => a.settings().and_then(|s| cmd_solve(&s, stdout)),
        Command::Bench(a) => a.settings().and_then(|s| cmd_bench(&s, stdout, stderr)),
        Command::Verify(a) => cmd_verify(a.output.as_deref(), stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => report(stderr, &e),
    }
}

fn cmd_solve(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_settings(s)?;
    let problem = cfg.problem()?;
    let traj = strategy::solve(&problem, cfg.grid()?, cfg.strategy())?;
    let out = open_output(cfg.output.as_deref(), stdout)?;
    csv::write_trajectory(&traj, out)?;
    Ok(EXIT_OK)
}

fn cmd_bench(s: &Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let spec = BenchSpec::from_settings(s)?;
    let output = s.get("output").map(PathBuf::from);
    let mut out = io::BufWriter::new(open_output(output.as_deref(), stdout)?);
    writeln!(out, "{}", BenchRecord::CSV_HEADER)?;
    out.flush()?;
    let mut io_err = None;
    let records = run_bench(&spec, |r| {
        if io_err.is_none() {
            if let Err(e) = writeln!(out, "{}", r.to_csv_row()).and_then(|_| out.flush()) {
                io_err = Some(e);
            }
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    for line in bench::projection_lines(&records, spec.project_steps) {
        writeln!(stderr, "{line}")?;
    }
    let failed = records.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        writeln!(stderr, "fode: {failed} bench cell(s) failed")?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(output: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let outcome = run_verify_suite();
    let mut out = open_output(output, stdout)?;
    out.write_all(outcome.to_csv().as_bytes())?;
    out.flush()?;
    drop(out);
    write!(stderr, "{}", outcome.summary())?;
    if outcome.passed() {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<&str> = outcome.failures().map(|c| c.name.as_str()).collect();
        writeln!(stderr, "fode: {} check(s) failed: {}", failed.len(), failed.join("; "))?;
        Ok(EXIT_FAILURE)
    }
}
