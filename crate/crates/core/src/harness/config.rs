//! Run configuration from flags and an optional `key = value` file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{FodeError, Result};
use crate::parallel::DEFAULT_CHUNK;
use crate::problem::{FractionalProblem, GridSpec};
use crate::strategy::{Strategy, StrategyKind};
use crate::systems::NamedSystem;

/// Keys accepted in a config file; each matches a long flag.
pub const KEYS: [&str; 12] = [
    "system",
    "alpha",
    "tmax",
    "steps",
    "strategy",
    "workers",
    "chunk",
    "output",
    "reps",
    "params",
    "y0",
    "project-steps",
];

/// Raw setting strings, flags layered over file values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('_', "-")
}

impl Settings {
    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// skipped; unknown or repeated keys are errors.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(FodeError::config(format!("config line {}: expected key = value, got '{line}'", i + 1)));
            };
            let key = normalize_key(k);
            if !KEYS.contains(&key.as_str()) {
                return Err(FodeError::config(format!("config line {}: unknown key '{key}'", i + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(FodeError::config(format!("config line {}: key '{key}' given twice", i + 1)));
            }
        }
        Ok(Settings { values })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let key = normalize_key(key);
        debug_assert!(KEYS.contains(&key.as_str()), "{key}");
        self.values.insert(key, value.into());
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl Into<String>>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| FodeError::config(format!("invalid value '{v}' for --{key}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?.ok_or_else(|| FodeError::config(format!("--{key} is required")))
    }

    /// Comma-separated list; `None` when the key is absent.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let items: Result<Vec<T>> = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| FodeError::config(format!("invalid entry '{s}' in --{key}"))))
            .collect();
        let items = items?;
        if items.is_empty() {
            return Err(FodeError::config(format!("--{key} is empty")));
        }
        Ok(Some(items))
    }

    pub fn system(&self) -> Result<NamedSystem> {
        let name: String = self.require("system")?;
        let params: Vec<f64> = self.list("params")?.unwrap_or_default();
        NamedSystem::from_name(&name, &params)
    }
}

/// Everything a single `solve` run needs. All runs are deterministic, so
/// there is no seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: NamedSystem,
    pub alpha: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub y0: Option<Vec<f64>>,
    pub strategy: StrategyKind,
    pub workers: usize,
    pub chunk: usize,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_T_END: f64 = 1.0;
pub const DEFAULT_STEPS: usize = 1000;

/// Worker count used when a parallel strategy is chosen without `--workers`.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let system = s.system()?;
        let alpha = s.require("alpha")?;
        let t_end = s.parse("tmax")?.unwrap_or(DEFAULT_T_END);
        let n_steps = s.parse("steps")?.unwrap_or(DEFAULT_STEPS);
        let strategy = s.parse("strategy")?.unwrap_or(StrategyKind::Serial);
        let workers = match s.parse("workers")? {
            Some(w) => w,
            None if strategy == StrategyKind::Serial => 1,
            None => default_workers().min(n_steps.max(1)),
        };
        let chunk = s.parse("chunk")?.unwrap_or(DEFAULT_CHUNK);
        let cfg = RunConfig {
            system,
            alpha,
            t_end,
            n_steps,
            y0: s.list("y0")?,
            strategy,
            workers,
            chunk,
            output: s.get("output").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything the solver would reject, before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.problem()?;
        let grid = GridSpec::new(self.t_end, self.n_steps)?;
        if self.workers == 0 {
            return Err(FodeError::config("--workers must be at least 1"));
        }
        if self.strategy != StrategyKind::Serial && self.workers > grid.n_steps() {
            return Err(FodeError::config(format!(
                "--workers {} exceeds --steps {}",
                self.workers,
                grid.n_steps()
            )));
        }
        if self.chunk == 0 {
            return Err(FodeError::config("--chunk must be at least 1"));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<FractionalProblem> {
        self.system.problem(self.alpha, self.t_end, self.y0.clone())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.t_end, self.n_steps)
    }

    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyKind::Serial => Strategy::Serial,
            StrategyKind::Block => Strategy::Block { workers: self.workers },
            StrategyKind::Reduction => Strategy::Reduction { workers: self.workers, chunk: self.chunk },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let s = Settings::parse_file("# run\nsystem = power-law\nalpha=0.5  # order\n\nproject_steps = 10\n").unwrap();
        assert_eq!(s.get("system"), Some("power-law"));
        assert_eq!(s.get("alpha"), Some("0.5"));
        assert_eq!(s.get("project-steps"), Some("10"));
        assert!(Settings::parse_file("alpha 0.5").is_err());
        assert!(Settings::parse_file("beta = 2").is_err());
        assert!(Settings::parse_file("alpha = 1\nalpha = 0.5").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse_file("system = linear\nalpha = 0.5\nsteps = 10").unwrap();
        s.set("steps", "20");
        let c = RunConfig::from_settings(&s).unwrap();
        assert_eq!(c.n_steps, 20);
        assert_eq!(c.system, NamedSystem::Linear { lambda: -1.0 });
        assert_eq!(c.strategy(), Strategy::Serial);
    }

    #[test]
    fn required_and_invalid() {
        let mut s = Settings::default();
        s.set("system", "hindmarsh-rose");
        assert!(matches!(RunConfig::from_settings(&s), Err(FodeError::Config(_))));
        s.set("alpha", "1.5");
        assert!(matches!(RunConfig::from_settings(&s), Err(FodeError::Domain(_))));
        s.set("alpha", "0.9");
        s.set("strategy", "block");
        s.set("workers", "0");
        assert!(RunConfig::from_settings(&s).is_err());
        s.set("workers", "4");
        s.set("steps", "3");
        assert!(RunConfig::from_settings(&s).is_err());
        s.set("steps", "x");
        assert!(RunConfig::from_settings(&s).is_err());
    }

    #[test]
    fn lists() {
        let mut s = Settings::default();
        s.set("steps", "100, 200,400");
        assert_eq!(s.list::<usize>("steps").unwrap(), Some(vec![100, 200, 400]));
        s.set("steps", ",");
        assert!(s.list::<usize>("steps").is_err());
        s.set("steps", "1,a");
        assert!(s.list::<usize>("steps").is_err());
    }
}
