//! Problem and grid data model for `D^α y(t) = f(t, y(t))`, `y(0) = y0`,
//! on `[0, T]` with Caputo order `0 < α ≤ 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{FodeError, Result};

/// Right-hand side `f(t, y)`, written into `dy` (same length as `y`).
///
/// Implementations must be pure: the solvers call them from several threads
/// and rely on identical inputs producing identical outputs.
pub trait Rhs: Send + Sync {
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// The state dimension this right-hand side is fixed to, if any.
    fn dim(&self) -> Option<usize> {
        None
    }
}

impl<F> Rhs for F
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        self(t, y, dy)
    }
}

/// Checks `0 < alpha <= 1`.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(FodeError::domain(format!("fractional order must lie in (0, 1], got {alpha}")))
    }
}

#[derive(Clone)]
pub struct FractionalProblem {
    alpha: f64,
    y0: Vec<f64>,
    t_end: f64,
    rhs: Arc<dyn Rhs>,
}

impl fmt::Debug for FractionalProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FractionalProblem")
            .field("alpha", &self.alpha)
            .field("y0", &self.y0)
            .field("t_end", &self.t_end)
            .finish_non_exhaustive()
    }
}

impl FractionalProblem {
    /// The state dimension is taken from `y0`.
    pub fn new(alpha: f64, y0: Vec<f64>, t_end: f64, rhs: Arc<dyn Rhs>) -> Result<Self> {
        check_alpha(alpha)?;
        if y0.is_empty() {
            return Err(FodeError::config("state dimension must be at least 1"));
        }
        if let Some(v) = y0.iter().find(|v| !v.is_finite()) {
            return Err(FodeError::config(format!("initial state must be finite, got {v}")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(FodeError::config(format!("horizon must be finite and positive, got {t_end}")));
        }
        if let Some(d) = rhs.dim() {
            if d != y0.len() {
                return Err(FodeError::config(format!(
                    "right-hand side has dimension {d}, initial state has {}",
                    y0.len()
                )));
            }
        }
        Ok(FractionalProblem { alpha, y0, t_end, rhs })
    }

    pub fn with_fn<F>(alpha: f64, y0: Vec<f64>, t_end: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(alpha, y0, t_end, Arc::new(f))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn rhs(&self) -> &Arc<dyn Rhs> {
        &self.rhs
    }

    /// Evaluates `f(t, y)` into `dy`.
    #[inline]
    pub fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim());
        debug_assert_eq!(dy.len(), self.dim());
        self.rhs.eval(t, y, dy)
    }
}

/// Uniform grid `t_n = n·h`, `h = T/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_steps: usize,
    h: f64,
}

impl GridSpec {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(FodeError::config("number of steps must be at least 1"));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(FodeError::config(format!("horizon must be finite and positive, got {t_end}")));
        }
        Ok(GridSpec { n_steps, h: t_end / n_steps as f64 })
    }

    pub fn for_problem(problem: &FractionalProblem, n_steps: usize) -> Result<Self> {
        Self::new(problem.t_end(), n_steps)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.h
    }
}
