//! Per-step arithmetic shared by all strategies: the predictor and corrector
//! history sums in canonical order, and the finishing formulas that turn
//! assembled sums into states.

use crate::error::{FodeError, Result};
use crate::history::accumulate;
use crate::problem::{FractionalProblem, GridSpec};
use crate::weights::WeightTable;

pub(crate) struct Scheme<'a> {
    pub problem: &'a FractionalProblem,
    pub weights: &'a WeightTable,
    pub grid: GridSpec,
    pub h_alpha: f64,
}

impl<'a> Scheme<'a> {
    pub fn new(problem: &'a FractionalProblem, weights: &'a WeightTable, grid: GridSpec) -> Result<Self> {
        if weights.alpha() != problem.alpha() {
            return Err(FodeError::config(format!(
                "weight table built for alpha = {}, problem has alpha = {}",
                weights.alpha(),
                problem.alpha()
            )));
        }
        if weights.n_max() < grid.n_steps() {
            return Err(FodeError::config(format!(
                "weight table covers {} steps, grid needs {}",
                weights.n_max(),
                grid.n_steps()
            )));
        }
        Ok(Scheme { problem, weights, grid, h_alpha: grid.h().powf(problem.alpha()), })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    /// `acc += Σ_{k∈[k0,k1)} b_{n-k} f_k`.
    #[inline]
    pub fn predictor_terms(&self, acc: &mut [f64], f: &[f64], n: usize, k0: usize, k1: usize) -> usize {
        accumulate(acc, self.weights.b(), f, self.dim(), n, k0, k1)
    }

    /// `acc += Σ_{k∈[k0,k1)} w_k f_k` with `w_0 = c_n` and `w_k = a_{n-k}` for `k >= 1`.
    #[inline]
    pub fn corrector_terms(&self, acc: &mut [f64], f: &[f64], n: usize, k0: usize, k1: usize) -> usize {
        let mut terms = 0;
        let mut start = k0;
        if k0 == 0 && k1 > 0 {
            self.first_node_term(acc, f, n);
            terms = 1;
            start = 1;
        }
        terms + accumulate(acc, self.weights.a(), f, self.dim(), n, start, k1)
    }

    /// `acc += c_n f_0`.
    #[inline]
    pub fn first_node_term(&self, acc: &mut [f64], f: &[f64], n: usize) {
        let c = self.weights.c()[n];
        for (a, v) in acc.iter_mut().zip(&f[..self.dim()]) {
            *a += c * v;
        }
    }

    /// `y^P_{n+1} = y0 + h^α · sum`.
    #[inline]
    pub fn finish_predictor(&self, sum: &[f64], out: &mut [f64]) {
        for ((o, y0), s) in out.iter_mut().zip(self.problem.y0()).zip(sum) {
            *o = y0 + self.h_alpha * s;
        }
    }

    /// `y_{n+1} = y0 + h^α · (sum + f(t_{n+1}, y^P) / Γ(α+2))`.
    #[inline]
    pub fn finish_corrector(&self, sum: &[f64], f_pred: &[f64], out: &mut [f64]) {
        let g = self.weights.gamma_alpha2();
        for (((o, y0), s), fp) in out.iter_mut().zip(self.problem.y0()).zip(sum).zip(f_pred) {
            *o = y0 + self.h_alpha * (s + fp / g);
        }
    }

    /// Evaluates `f(t_step, y)` into `out`, failing if either is non-finite.
    pub fn eval_checked(&self, step: usize, y: &[f64], out: &mut [f64], what: &str) -> Result<()> {
        let t = self.grid.t(step);
        check_finite(step, t, y, what)?;
        self.problem.eval(t, y, out);
        check_finite(step, t, out, "right-hand side")
    }
}

pub(crate) fn check_finite(step: usize, t: f64, v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(FodeError::Step { step, t, what: format!("{what} = {v:?}") })
    }
}
