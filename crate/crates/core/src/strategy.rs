use std::fmt;
use std::str::FromStr;

use crate::error::{FodeError, Result};
use crate::parallel::{solve_block_parallel, solve_reduction_parallel};
use crate::problem::{FractionalProblem, GridSpec};
use crate::serial::{solve_serial, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Serial,
    Block,
    Reduction,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Serial => "serial",
            StrategyKind::Block => "block",
            StrategyKind::Reduction => "reduction",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = FodeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(StrategyKind::Serial),
            "block" => Ok(StrategyKind::Block),
            "reduction" => Ok(StrategyKind::Reduction),
            other => Err(FodeError::config(format!("unknown strategy '{other}' (serial|block|reduction)"))),
        }
    }
}

/// A fully parameterized execution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Serial,
    Block { workers: usize },
    Reduction { workers: usize, chunk: usize },
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::Serial => StrategyKind::Serial,
            Strategy::Block { .. } => StrategyKind::Block,
            Strategy::Reduction { .. } => StrategyKind::Reduction,
        }
    }

    pub fn workers(&self) -> usize {
        match *self {
            Strategy::Serial => 1,
            Strategy::Block { workers } | Strategy::Reduction { workers, .. } => workers,
        }
    }

    pub fn chunk(&self) -> Option<usize> {
        match *self {
            Strategy::Reduction { chunk, .. } => Some(chunk),
            _ => None,
        }
    }
}

pub fn solve(problem: &FractionalProblem, grid: GridSpec, strategy: Strategy) -> Result<Trajectory> {
    match strategy {
        Strategy::Serial => solve_serial(problem, grid),
        Strategy::Block { workers } => solve_block_parallel(problem, grid, workers),
        Strategy::Reduction { workers, chunk } => solve_reduction_parallel(problem, grid, workers, chunk),
    }
}
