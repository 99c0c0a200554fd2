//! Chunked tree-reduction strategy.
//!
//! At step `n` the history `k ∈ [0, n]` is cut into fixed chunks of `chunk`
//! rows. Chunk `j` goes to worker `j mod P`, which sums it in ascending `k`
//! for both the predictor and the corrector weights (the corrector history
//! does not depend on the prediction). The leader (worker 0) then combines
//! the chunk sums pairwise over chunk indices, level by level, finishes the
//! step and publishes the new row. Chunk boundaries depend only on
//! `(n, chunk)`, so the result is reproducible bit for bit; with a single
//! chunk it equals the serial solver.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Duration;

use crate::error::{FodeError, Result};
use crate::parallel::sync::{first_error, AbortOnPanic, SharedRows, Waiter};
use crate::parallel::DEFAULT_WATCHDOG;
use crate::problem::{FractionalProblem, GridSpec};
use crate::scheme::{check_finite, Scheme};
use crate::serial::Trajectory;
use crate::weights::precompute_weights;

pub const DEFAULT_CHUNK: usize = 1024;

#[derive(Debug, Clone)]
pub struct ReductionOptions {
    pub n_workers: usize,
    pub chunk: usize,
    pub watchdog: Duration,
}

impl ReductionOptions {
    pub fn new(n_workers: usize, chunk: usize) -> Self {
        ReductionOptions { n_workers, chunk, watchdog: DEFAULT_WATCHDOG }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionStats {
    pub chunks_per_worker: Vec<u64>,
    pub terms_per_worker: Vec<u64>,
}

/// Solves with `n_workers` workers reducing fixed chunks of `chunk` rows.
pub fn solve_reduction_parallel(
    problem: &FractionalProblem,
    grid: GridSpec,
    n_workers: usize,
    chunk: usize,
) -> Result<Trajectory> {
    solve_reduction_parallel_with(problem, grid, &ReductionOptions::new(n_workers, chunk)).map(|(t, _)| t)
}

/// Pairwise combination over chunk indices: `s[i] = s[2i] + s[2i+1]` per
/// level, an odd tail carried up unchanged. `sums` holds `count` rows of
/// `dim` values and is overwritten; the total ends up in row 0.
pub(crate) fn tree_combine(sums: &mut [f64], count: usize, dim: usize) {
    let mut len = count;
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            for j in 0..dim {
                sums[i * dim + j] = sums[2 * i * dim + j] + sums[(2 * i + 1) * dim + j];
            }
        }
        if len % 2 == 1 {
            for j in 0..dim {
                sums[half * dim + j] = sums[(len - 1) * dim + j];
            }
        }
        len = len.div_ceil(2);
    }
}

struct Shared<'a> {
    scheme: Scheme<'a>,
    n_workers: usize,
    chunk: usize,
    states: SharedRows,
    f_rows: SharedRows,
    // row 2j: predictor sum of chunk j, row 2j+1: corrector sum
    chunk_sums: SharedRows,
    published: AtomicU64,
    done: Vec<AtomicU64>,
    abort: AtomicBool,
    watchdog: Duration,
}

pub fn solve_reduction_parallel_with(
    problem: &FractionalProblem,
    grid: GridSpec,
    opts: &ReductionOptions,
) -> Result<(Trajectory, ReductionStats)> {
    let n_steps = grid.n_steps();
    if opts.n_workers == 0 || opts.n_workers > n_steps {
        return Err(FodeError::config(format!(
            "reduction needs 1 <= workers <= steps, got {} workers for {n_steps} steps",
            opts.n_workers
        )));
    }
    if opts.chunk == 0 {
        return Err(FodeError::config("chunk size must be at least 1"));
    }
    let weights = precompute_weights(problem.alpha(), n_steps)?;
    let scheme = Scheme::new(problem, &weights, grid)?;
    let dim = problem.dim();
    let max_chunks = n_steps.div_ceil(opts.chunk);

    let states = SharedRows::new(n_steps + 1, dim);
    let f_rows = SharedRows::new(n_steps + 1, dim);
    // SAFETY: no worker exists yet.
    unsafe {
        states.row_mut(0).copy_from_slice(problem.y0());
        let f0 = f_rows.row_mut(0);
        problem.eval(0.0, problem.y0(), f0);
        check_finite(0, 0.0, f0, "right-hand side")?;
    }

    let shared = Shared {
        scheme,
        n_workers: opts.n_workers,
        chunk: opts.chunk,
        states,
        f_rows,
        chunk_sums: SharedRows::new(2 * max_chunks, dim),
        published: AtomicU64::new(0),
        done: (0..opts.n_workers).map(|_| AtomicU64::new(0)).collect(),
        abort: AtomicBool::new(false),
        watchdog: opts.watchdog,
    };

    let results: Vec<Result<(u64, u64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..opts.n_workers)
            .map(|w| {
                let shared = &shared;
                s.spawn(move || {
                    let _guard = AbortOnPanic(&shared.abort);
                    let r = if w == 0 { run_leader(shared) } else { run_worker(shared, w) };
                    if r.is_err() {
                        shared.abort.store(true, Ordering::Relaxed);
                    }
                    r
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
            .collect()
    });

    let mut stats = ReductionStats::default();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok((chunks, terms)) => {
                stats.chunks_per_worker.push(chunks);
                stats.terms_per_worker.push(terms);
            }
            Err(e) => errors.push(e),
        }
    }
    if let Some(e) = first_error(errors) {
        return Err(e);
    }
    let Shared { states, f_rows, .. } = shared;
    Ok((Trajectory::from_parts(grid, dim, states.into_vec(), f_rows.into_vec()), stats))
}

/// Sums this worker's chunks for step `n`. Returns (chunks, terms).
fn sum_own_chunks(sh: &Shared<'_>, w: usize, n: usize) -> (u64, u64) {
    let n_chunks = (n + 1).div_ceil(sh.chunk);
    // SAFETY: rows 0..=n are published and never rewritten.
    let f = unsafe { sh.f_rows.rows(0, n + 1) };
    let (mut chunks, mut terms) = (0, 0);
    for j in (w..n_chunks).step_by(sh.n_workers) {
        let k0 = j * sh.chunk;
        let k1 = (k0 + sh.chunk).min(n + 1);
        // SAFETY: chunk j is written only by worker j mod P during step n;
        // the leader reads it after this worker signals `done`.
        let (pred, corr) = unsafe { (sh.chunk_sums.row_mut(2 * j), sh.chunk_sums.row_mut(2 * j + 1)) };
        pred.fill(0.0);
        corr.fill(0.0);
        terms += sh.scheme.predictor_terms(pred, f, n, k0, k1) as u64;
        sh.scheme.corrector_terms(corr, f, n, k0, k1);
        chunks += 1;
    }
    (chunks, terms)
}

fn run_worker(sh: &Shared<'_>, w: usize) -> Result<(u64, u64)> {
    let waiter = Waiter::new(&sh.abort, sh.watchdog);
    let (mut chunks, mut terms) = (0, 0);
    for n in 0..sh.scheme.grid.n_steps() {
        waiter.wait_until(|| sh.published.load(Ordering::Acquire) >= n as u64)?;
        if w >= (n + 1).div_ceil(sh.chunk) {
            continue;
        }
        let (c, t) = sum_own_chunks(sh, w, n);
        chunks += c;
        terms += t;
        sh.done[w].store(n as u64 + 1, Ordering::Release);
    }
    Ok((chunks, terms))
}

fn run_leader(sh: &Shared<'_>) -> Result<(u64, u64)> {
    let scheme = &sh.scheme;
    let dim = scheme.dim();
    let waiter = Waiter::new(&sh.abort, sh.watchdog);
    let max_chunks = scheme.grid.n_steps().div_ceil(sh.chunk);
    let mut pred_sums = vec![0.0; max_chunks * dim];
    let mut corr_sums = vec![0.0; max_chunks * dim];
    let mut y_pred = vec![0.0; dim];
    let mut f_pred = vec![0.0; dim];
    let mut y_next = vec![0.0; dim];
    let (mut chunks, mut terms) = (0, 0);

    for n in 0..scheme.grid.n_steps() {
        let n_chunks = (n + 1).div_ceil(sh.chunk);
        let (c, t) = sum_own_chunks(sh, 0, n);
        chunks += c;
        terms += t;
        for w in 1..sh.n_workers.min(n_chunks) {
            waiter.wait_until(|| sh.done[w].load(Ordering::Acquire) > n as u64)?;
        }
        for j in 0..n_chunks {
            // SAFETY: all chunk writers for step n have signalled `done`.
            let (p, c) = unsafe { (sh.chunk_sums.rows(2 * j, 2 * j + 1), sh.chunk_sums.rows(2 * j + 1, 2 * j + 2)) };
            pred_sums[j * dim..(j + 1) * dim].copy_from_slice(p);
            corr_sums[j * dim..(j + 1) * dim].copy_from_slice(c);
        }
        tree_combine(&mut pred_sums, n_chunks, dim);
        tree_combine(&mut corr_sums, n_chunks, dim);

        scheme.finish_predictor(&pred_sums[..dim], &mut y_pred);
        if let Err(e) = scheme.eval_checked(n + 1, &y_pred, &mut f_pred, "predicted state") {
            waiter.abort();
            return Err(e);
        }
        scheme.finish_corrector(&corr_sums[..dim], &f_pred, &mut y_next);

        // SAFETY: only the leader writes rows, and row n + 1 is not yet published.
        let (row_y, row_f) = unsafe { (sh.states.row_mut(n + 1), sh.f_rows.row_mut(n + 1)) };
        row_y.copy_from_slice(&y_next);
        if let Err(e) = scheme.eval_checked(n + 1, row_y, row_f, "state") {
            waiter.abort();
            return Err(e);
        }
        sh.published.store(n as u64 + 1, Ordering::Release);
    }
    Ok((chunks, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::serial::solve_serial;

    fn logistic(alpha: f64) -> FractionalProblem {
        FractionalProblem::with_fn(alpha, vec![0.1, 2.0], 3.0, |_t, y, dy: &mut [f64]| {
            dy[0] = y[0] * (1.0 - y[0]);
            dy[1] = -0.5 * y[1] + y[0];
        })
        .unwrap()
    }

    #[test]
    fn tree_shape() {
        // ((1+2)+(3+4))+5
        let mut s = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        tree_combine(&mut s, 5, 1);
        assert_eq!(s[0], 15.0);
        let mut s = vec![0.1, 0.2, 0.3];
        tree_combine(&mut s, 3, 1);
        assert_eq!(s[0].to_bits(), ((0.1f64 + 0.2) + 0.3).to_bits());
        let mut s = vec![7.0, 8.0];
        tree_combine(&mut s, 1, 2);
        assert_eq!(s, vec![7.0, 8.0]);
    }

    #[test]
    fn single_chunk_is_bitwise_serial() {
        let p = logistic(0.6);
        let grid = GridSpec::new(3.0, 200).unwrap();
        let serial = solve_serial(&p, grid).unwrap();
        for workers in [1, 3] {
            let red = solve_reduction_parallel(&p, grid, workers, 200).unwrap();
            assert!(red.bitwise_eq(&serial), "P={workers}");
        }
    }

    #[test]
    fn small_chunks_match_serial() {
        let p = logistic(0.75);
        let grid = GridSpec::new(3.0, 257).unwrap();
        let serial = solve_serial(&p, grid).unwrap();
        for (workers, chunk) in [(1, 1), (2, 7), (4, 16), (3, 64)] {
            let red = solve_reduction_parallel(&p, grid, workers, chunk).unwrap();
            let dev = red.sup_rel_deviation(&serial);
            assert!(dev <= 1e-12, "P={workers} chunk={chunk}: {dev}");
        }
    }

    #[test]
    fn reproducible_across_runs_and_worker_counts() {
        let p = logistic(0.5);
        let grid = GridSpec::new(3.0, 300).unwrap();
        let a = solve_reduction_parallel(&p, grid, 2, 16).unwrap();
        let b = solve_reduction_parallel(&p, grid, 2, 16).unwrap();
        let c = solve_reduction_parallel(&p, grid, 4, 16).unwrap();
        assert!(a.bitwise_eq(&b));
        // chunk boundaries, not the worker count, fix the rounding
        assert!(a.bitwise_eq(&c));
    }

    #[test]
    fn chunks_are_spread_round_robin() {
        let p = logistic(0.5);
        let grid = GridSpec::new(3.0, 64).unwrap();
        let (_, stats) = solve_reduction_parallel_with(&p, grid, &ReductionOptions::new(2, 8)).unwrap();
        let total_terms: u64 = stats.terms_per_worker.iter().sum();
        assert_eq!(total_terms, 64 * 65 / 2);
        let total_chunks: u64 = stats.chunks_per_worker.iter().sum();
        let expect: u64 = (0..64usize).map(|n| (n + 1).div_ceil(8) as u64).sum();
        assert_eq!(total_chunks, expect);
    }

    #[test]
    fn bad_configuration() {
        let p = logistic(0.5);
        let grid = GridSpec::new(3.0, 10).unwrap();
        assert!(solve_reduction_parallel(&p, grid, 2, 0).is_err());
        assert!(solve_reduction_parallel(&p, grid, 0, 4).is_err());
        assert!(solve_reduction_parallel(&p, grid, 11, 4).is_err());
    }

    #[test]
    fn numerical_failure_propagates() {
        let p = FractionalProblem::with_fn(0.9, vec![1.0], 1.0, |t, _y, dy: &mut [f64]| {
            dy[0] = if t > 0.5 { f64::NAN } else { 1.0 }
        })
        .unwrap();
        let grid = GridSpec::new(1.0, 100).unwrap();
        assert!(matches!(solve_reduction_parallel(&p, grid, 3, 8), Err(FodeError::Step { step: 51, .. })));
    }
}
