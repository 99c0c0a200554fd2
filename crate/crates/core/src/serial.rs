//! Reference sequential predictor-corrector solver (PECE, one correction
//! per step). Every parallel strategy is checked against it.

use crate::error::{FodeError, Result};
use crate::problem::{FractionalProblem, GridSpec};
use crate::scheme::{check_finite, Scheme};
use crate::weights::{precompute_weights, WeightTable};

/// States `y_0..y_N` on the uniform grid and the cached `f_n = f(t_n, y_n)`
/// at the accepted states. Both are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: GridSpec,
    dim: usize,
    len: usize,
    states: Vec<f64>,
    f_cache: Vec<f64>,
}

impl Trajectory {
    /// Allocates room for all `N + 1` rows and fills row 0 with `y0` and
    /// `f(0, y0)`.
    pub fn start(problem: &FractionalProblem, grid: GridSpec) -> Result<Self> {
        let dim = problem.dim();
        let rows = grid.n_steps() + 1;
        let mut states = vec![0.0; rows * dim];
        let mut f_cache = vec![0.0; rows * dim];
        states[..dim].copy_from_slice(problem.y0());
        problem.eval(0.0, problem.y0(), &mut f_cache[..dim]);
        check_finite(0, 0.0, &f_cache[..dim], "right-hand side")?;
        Ok(Trajectory { grid, dim, len: 1, states, f_cache })
    }

    pub(crate) fn from_parts(grid: GridSpec, dim: usize, states: Vec<f64>, f_cache: Vec<f64>) -> Self {
        let len = grid.n_steps() + 1;
        debug_assert_eq!(states.len(), len * dim);
        debug_assert_eq!(f_cache.len(), len * dim);
        Trajectory { grid, dim, len, states, f_cache }
    }

    /// Appends `y_next` as the next accepted state and caches `f` there.
    pub fn accept(&mut self, problem: &FractionalProblem, y_next: &[f64]) -> Result<()> {
        let n = self.len;
        if n > self.grid.n_steps() {
            return Err(FodeError::Index { index: n, limit: self.grid.n_steps() });
        }
        if y_next.len() != self.dim {
            return Err(FodeError::config(format!("state has {} entries, expected {}", y_next.len(), self.dim)));
        }
        let t = self.grid.t(n);
        check_finite(n, t, y_next, "state")?;
        let row = n * self.dim..(n + 1) * self.dim;
        problem.eval(t, y_next, &mut self.f_cache[row.clone()]);
        check_finite(n, t, &self.f_cache[row.clone()], "right-hand side")?;
        self.states[row].copy_from_slice(y_next);
        self.len += 1;
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of completed rows.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_complete(&self) -> bool {
        self.len == self.grid.n_steps() + 1
    }

    pub fn t(&self, n: usize) -> f64 {
        self.grid.t(n)
    }

    pub fn state(&self, n: usize) -> &[f64] {
        assert!(n < self.len, "row {n} not computed (have {})", self.len);
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn f(&self, n: usize) -> &[f64] {
        assert!(n < self.len, "row {n} not computed (have {})", self.len);
        &self.f_cache[n * self.dim..(n + 1) * self.dim]
    }

    /// Completed states, row-major.
    pub fn states(&self) -> &[f64] {
        &self.states[..self.len * self.dim]
    }

    /// Completed `f` rows, row-major.
    pub fn f_values(&self) -> &[f64] {
        &self.f_cache[..self.len * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len - 1)
    }

    /// Largest `|a - b|` over all entries, divided by the largest `|b|`
    /// (`self` is `a`). Both trajectories must have the same shape.
    pub fn sup_rel_deviation(&self, reference: &Trajectory) -> f64 {
        assert_eq!(self.states().len(), reference.states().len(), "trajectory shapes differ");
        let scale = reference.states().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self
            .states()
            .iter()
            .zip(reference.states())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// True when the states and cached `f` agree bit for bit.
    pub fn bitwise_eq(&self, other: &Trajectory) -> bool {
        self.len == other.len
            && self.dim == other.dim
            && self.states().iter().zip(other.states()).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.f_values().iter().zip(other.f_values()).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_step(traj: &Trajectory, n: usize) -> Result<()> {
    let n_steps = traj.grid.n_steps();
    if n >= n_steps {
        return Err(FodeError::Index { index: n, limit: n_steps });
    }
    if n >= traj.len {
        return Err(FodeError::Index { index: n, limit: traj.len });
    }
    Ok(())
}

/// `y^P_{n+1} = y0 + h^α Σ_{k=0}^{n} b_{n-k} f_k`.
pub fn step_predictor(
    problem: &FractionalProblem,
    weights: &WeightTable,
    traj: &Trajectory,
    n: usize,
) -> Result<Vec<f64>> {
    check_step(traj, n)?;
    let scheme = Scheme::new(problem, weights, traj.grid)?;
    let d = problem.dim();
    let mut acc = vec![0.0; d];
    scheme.predictor_terms(&mut acc, traj.f_values(), n, 0, n + 1);
    let mut y = vec![0.0; d];
    scheme.finish_predictor(&acc, &mut y);
    check_finite(n + 1, traj.t(n + 1), &y, "predicted state")?;
    Ok(y)
}

/// `y_{n+1} = y0 + h^α (c_n f_0 + Σ_{k=1}^{n} a_{n-k} f_k + f(t_{n+1}, y^P)/Γ(α+2))`.
pub fn step_corrector(
    problem: &FractionalProblem,
    weights: &WeightTable,
    traj: &Trajectory,
    n: usize,
    y_pred: &[f64],
) -> Result<Vec<f64>> {
    check_step(traj, n)?;
    let scheme = Scheme::new(problem, weights, traj.grid)?;
    let d = problem.dim();
    if y_pred.len() != d {
        return Err(FodeError::config(format!("predicted state has {} entries, expected {d}", y_pred.len())));
    }
    let mut f_pred = vec![0.0; d];
    scheme.eval_checked(n + 1, y_pred, &mut f_pred, "predicted state")?;
    let mut acc = vec![0.0; d];
    scheme.corrector_terms(&mut acc, traj.f_values(), n, 0, n + 1);
    let mut y = vec![0.0; d];
    scheme.finish_corrector(&acc, &f_pred, &mut y);
    check_finite(n + 1, traj.t(n + 1), &y, "corrected state")?;
    Ok(y)
}

/// Solves the problem on `grid` sequentially.
pub fn solve_serial(problem: &FractionalProblem, grid: GridSpec) -> Result<Trajectory> {
    let weights = precompute_weights(problem.alpha(), grid.n_steps())?;
    solve_serial_with(problem, grid, &weights)
}

/// As [`solve_serial`] with a caller-supplied weight table.
pub fn solve_serial_with(problem: &FractionalProblem, grid: GridSpec, weights: &WeightTable) -> Result<Trajectory> {
    let scheme = Scheme::new(problem, weights, grid)?;
    let mut traj = Trajectory::start(problem, grid)?;
    let d = problem.dim();
    let mut acc = vec![0.0; d];
    let mut y_pred = vec![0.0; d];
    let mut f_pred = vec![0.0; d];
    let mut y_next = vec![0.0; d];

    for n in 0..grid.n_steps() {
        acc.fill(0.0);
        scheme.predictor_terms(&mut acc, traj.f_values(), n, 0, n + 1);
        scheme.finish_predictor(&acc, &mut y_pred);
        scheme.eval_checked(n + 1, &y_pred, &mut f_pred, "predicted state")?;

        acc.fill(0.0);
        scheme.corrector_terms(&mut acc, traj.f_values(), n, 0, n + 1);
        scheme.finish_corrector(&acc, &f_pred, &mut y_next);
        traj.accept(problem, &y_next)?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use std::sync::Arc;

    fn constant(alpha: f64, y0: Vec<f64>, t_end: f64, value: f64) -> FractionalProblem {
        FractionalProblem::with_fn(alpha, y0, t_end, move |_t, _y, dy: &mut [f64]| dy.fill(value)).unwrap()
    }

    #[test]
    fn zero_rhs_keeps_initial_state() {
        let p = constant(0.7, vec![3.0], 1.0, 0.0);
        let grid = GridSpec::new(1.0, 50).unwrap();
        let traj = solve_serial(&p, grid).unwrap();
        assert_eq!(traj.len(), 51);
        for n in 0..=50 {
            assert_eq!(traj.state(n)[0].to_bits(), 3.0f64.to_bits());
        }
    }

    #[test]
    fn predictor_and_corrector_first_step() {
        // D y = 1, y0 = 0, h = 0.1
        let p = constant(1.0, vec![0.0], 1.0, 1.0);
        let grid = GridSpec::new(1.0, 10).unwrap();
        let w = precompute_weights(1.0, 10).unwrap();
        let traj = Trajectory::start(&p, grid).unwrap();
        let yp = step_predictor(&p, &w, &traj, 0).unwrap();
        assert!((yp[0] - 0.1).abs() < 1e-15);
        let yc = step_corrector(&p, &w, &traj, 0, &yp).unwrap();
        assert!((yc[0] - 0.1).abs() < 1e-15);

        // D^0.5 y = 1: y^P_1 = h^0.5 b_0 = 0.1^0.5 / Γ(1.5)
        let p = constant(0.5, vec![0.0], 1.0, 1.0);
        let w = precompute_weights(0.5, 10).unwrap();
        let traj = Trajectory::start(&p, grid).unwrap();
        let yp = step_predictor(&p, &w, &traj, 0).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let expect = 0.1f64.sqrt() / (0.5 * sqrt_pi);
        assert!((yp[0] - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn corrector_three_terms_by_hand() {
        // D^0.5 y = t, h = 0.1, step n = 1 (computing y_2).
        let alpha = 0.5;
        let p = FractionalProblem::with_fn(alpha, vec![0.0], 1.0, |t, _y, dy: &mut [f64]| dy[0] = t).unwrap();
        let grid = GridSpec::new(1.0, 10).unwrap();
        let w = precompute_weights(alpha, 10).unwrap();
        let mut traj = Trajectory::start(&p, grid).unwrap();
        let yp = step_predictor(&p, &w, &traj, 0).unwrap();
        let y1 = step_corrector(&p, &w, &traj, 0, &yp).unwrap();
        traj.accept(&p, &y1).unwrap();
        let yp2 = step_predictor(&p, &w, &traj, 1).unwrap();
        let y2 = step_corrector(&p, &w, &traj, 1, &yp2).unwrap();

        // f(t, y) = t ignores y, so y2 = h^α (c_1·0 + a_0·0.1 + 0.2/Γ(2.5))
        // with a_0 = (2^1.5 - 2)/Γ(2.5), evaluated in 60-digit arithmetic.
        let expect = 0.1f64.sqrt() * (0.62318660601362418382 * 0.1 + 0.2 / 1.3293403881791370205);
        assert!((y2[0] - expect).abs() <= 1e-15 * expect, "{} vs {}", y2[0], expect);
    }

    #[test]
    fn unit_order_decay_matches_exp() {
        let p = FractionalProblem::with_fn(1.0, vec![1.0], 1.0, |_t, y, dy: &mut [f64]| dy[0] = -y[0]).unwrap();
        let traj = solve_serial(&p, GridSpec::new(1.0, 1000).unwrap()).unwrap();
        assert!((traj.last_state()[0] - (-1.0f64).exp()).abs() <= 1e-4);
    }

    #[test]
    fn power_law_solution() {
        let g = gamma(3.0).unwrap() / gamma(2.5).unwrap();
        let p = FractionalProblem::with_fn(0.5, vec![0.0], 1.0, move |t, _y, dy: &mut [f64]| {
            dy[0] = g * t.powf(1.5)
        })
        .unwrap();
        let traj = solve_serial(&p, GridSpec::new(1.0, 1000).unwrap()).unwrap();
        assert!((traj.last_state()[0] - 1.0).abs() <= 5e-3);
    }

    #[test]
    fn constant_rhs_exact_at_unit_order() {
        let p = constant(1.0, vec![2.0, -1.0], 3.0, 0.75);
        let grid = GridSpec::new(3.0, 300).unwrap();
        let traj = solve_serial(&p, grid).unwrap();
        for n in 0..=300 {
            let exact = [2.0 + 0.75 * grid.t(n), -1.0 + 0.75 * grid.t(n)];
            for (v, e) in traj.state(n).iter().zip(exact) {
                assert!((v - e).abs() <= 1e-12 * e.abs().max(1.0));
            }
        }
    }

    #[test]
    fn non_finite_rhs_reports_step() {
        let p = FractionalProblem::with_fn(0.8, vec![1.0], 1.0, |t, _y, dy: &mut [f64]| {
            dy[0] = if t > 0.5 { f64::NAN } else { 1.0 }
        })
        .unwrap();
        let err = solve_serial(&p, GridSpec::new(1.0, 10).unwrap()).unwrap_err();
        match err {
            FodeError::Step { step, t, .. } => {
                assert_eq!(step, 6);
                assert!((t - 0.6).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blow_up_is_an_error_not_inf() {
        let p = FractionalProblem::with_fn(1.0, vec![1.0], 10.0, |_t, y, dy: &mut [f64]| dy[0] = y[0] * y[0]).unwrap();
        assert!(matches!(solve_serial(&p, GridSpec::new(10.0, 1000).unwrap()), Err(FodeError::Step { .. })));
    }

    #[test]
    fn step_preconditions() {
        let p = constant(0.5, vec![0.0], 1.0, 1.0);
        let grid = GridSpec::new(1.0, 4).unwrap();
        let w = precompute_weights(0.5, 4).unwrap();
        let traj = Trajectory::start(&p, grid).unwrap();
        assert!(matches!(step_predictor(&p, &w, &traj, 1), Err(FodeError::Index { .. })));
        assert!(matches!(step_predictor(&p, &w, &traj, 4), Err(FodeError::Index { .. })));
        let w_other = precompute_weights(0.6, 4).unwrap();
        assert!(matches!(step_predictor(&p, &w_other, &traj, 0), Err(FodeError::Config(_))));
        let w_short = precompute_weights(0.5, 2).unwrap();
        assert!(solve_serial_with(&p, grid, &w_short).is_err());
    }

    #[test]
    fn step_functions_reproduce_solver() {
        let p = FractionalProblem::new(
            0.6,
            vec![1.0, 0.5],
            2.0,
            Arc::new(|t: f64, y: &[f64], dy: &mut [f64]| {
                dy[0] = -y[1] + t.cos();
                dy[1] = y[0] - 0.1 * y[1];
            }),
        )
        .unwrap();
        let grid = GridSpec::new(2.0, 64).unwrap();
        let w = precompute_weights(0.6, 64).unwrap();
        let mut traj = Trajectory::start(&p, grid).unwrap();
        for n in 0..64 {
            let yp = step_predictor(&p, &w, &traj, n).unwrap();
            let y = step_corrector(&p, &w, &traj, n, &yp).unwrap();
            traj.accept(&p, &y).unwrap();
        }
        assert!(traj.is_complete());
        let direct = solve_serial(&p, grid).unwrap();
        assert!(traj.bitwise_eq(&direct));
        assert!(traj.accept(&p, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic() {
        let p = FractionalProblem::with_fn(0.4, vec![0.3], 5.0, |t, y, dy: &mut [f64]| dy[0] = (t * y[0]).sin()).unwrap();
        let grid = GridSpec::new(5.0, 500).unwrap();
        let a = solve_serial(&p, grid).unwrap();
        let b = solve_serial(&p, grid).unwrap();
        assert!(a.bitwise_eq(&b));
    }
}
