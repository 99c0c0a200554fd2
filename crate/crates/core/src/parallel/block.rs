//! Block-partitioned strategy.
//!
//! The step range is split into contiguous blocks, one per worker, and each
//! worker keeps the history rows of its own block. At step `n` the owner of
//! block `⌊n/B⌋` assembles the history sum: every lower worker sums its whole
//! block and sends the partial to the owner, the owner adds those partials
//! in ascending worker order and then its own rows up to `n`. The same
//! gather is repeated with the corrector weights, where the owner also takes
//! the `c_n f_0` term. The owner then publishes `y_{n+1}` and `f_{n+1}` to
//! everyone, which is the barrier for step `n + 1`. Workers above the owner
//! have nothing to do until the iteration reaches their block.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Duration;

use crate::error::Result;
use crate::parallel::partition::{make_partition, PartitionPlan};
use crate::parallel::sync::{first_error, AbortOnPanic, Mailbox, SharedRows, Waiter};
use crate::parallel::DEFAULT_WATCHDOG;
use crate::problem::{FractionalProblem, GridSpec};
use crate::scheme::{check_finite, Scheme};
use crate::serial::Trajectory;
use crate::weights::precompute_weights;

/// A worker's weighted sum over its own block, sent to the owner of `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSum {
    pub worker: usize,
    pub step: usize,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BlockOptions {
    pub n_workers: usize,
    pub watchdog: Duration,
    /// Record the number of history terms handled per step (costs one
    /// `Vec<u32>` of length N per worker).
    pub record_work: bool,
}

impl BlockOptions {
    pub fn new(n_workers: usize) -> Self {
        BlockOptions { n_workers, watchdog: DEFAULT_WATCHDOG, record_work: false }
    }
}

/// Per-worker instrumentation counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkerCounters {
    pub messages_sent: u64,
    /// Steps owned by a lower worker while this one had nothing to send.
    pub idle_steps: u64,
    pub owned_steps: u64,
    pub predictor_terms: u64,
    pub corrector_terms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub plan: PartitionPlan,
    pub workers: Vec<WorkerCounters>,
    /// Predictor terms summed across workers for each step, when recorded.
    pub predictor_terms_per_step: Option<Vec<u64>>,
    pub corrector_terms_per_step: Option<Vec<u64>>,
}

impl BlockStats {
    pub fn idle_fraction(&self, worker: usize) -> f64 {
        self.workers[worker].idle_steps as f64 / self.plan.n_steps() as f64
    }

    pub fn messages_sent(&self) -> u64 {
        self.workers.iter().map(|w| w.messages_sent).sum()
    }
}

/// Solves with `n_workers` block-partitioned workers.
pub fn solve_block_parallel(problem: &FractionalProblem, grid: GridSpec, n_workers: usize) -> Result<Trajectory> {
    solve_block_parallel_with(problem, grid, &BlockOptions::new(n_workers)).map(|(t, _)| t)
}

struct Shared<'a> {
    scheme: Scheme<'a>,
    plan: PartitionPlan,
    states: SharedRows,
    f_rows: SharedRows,
    published: AtomicU64,
    // [worker][phase]: 0 predictor, 1 corrector
    mailboxes: Vec<[Mailbox; 2]>,
    abort: AtomicBool,
    watchdog: Duration,
    record_work: bool,
}

struct WorkerResult {
    counters: WorkerCounters,
    pred_per_step: Vec<u32>,
    corr_per_step: Vec<u32>,
}

pub fn solve_block_parallel_with(
    problem: &FractionalProblem,
    grid: GridSpec,
    opts: &BlockOptions,
) -> Result<(Trajectory, BlockStats)> {
    let n_steps = grid.n_steps();
    let plan = make_partition(n_steps, opts.n_workers)?;
    let weights = precompute_weights(problem.alpha(), n_steps)?;
    let scheme = Scheme::new(problem, &weights, grid)?;
    let dim = problem.dim();

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
        mailboxes: (0..opts.n_workers).map(|_| [Mailbox::new(dim), Mailbox::new(dim)]).collect(),
        plan: plan.clone(),
        states,
        f_rows,
        published: AtomicU64::new(0),
        abort: AtomicBool::new(false),
        watchdog: opts.watchdog,
        record_work: opts.record_work,
    };

    let results: Vec<Result<WorkerResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..opts.n_workers)
            .map(|p| {
                let shared = &shared;
                s.spawn(move || {
                    let _guard = AbortOnPanic(&shared.abort);
                    let r = run_worker(shared, p);
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

    let mut workers = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(w) => workers.push(w),
            Err(e) => errors.push(e),
        }
    }
    if let Some(e) = first_error(errors) {
        return Err(e);
    }

    let (pred_steps, corr_steps) = if opts.record_work {
        let mut pred = vec![0u64; n_steps];
        let mut corr = vec![0u64; n_steps];
        for w in &workers {
            for (acc, v) in pred.iter_mut().zip(&w.pred_per_step) {
                *acc += u64::from(*v);
            }
            for (acc, v) in corr.iter_mut().zip(&w.corr_per_step) {
                *acc += u64::from(*v);
            }
        }
        (Some(pred), Some(corr))
    } else {
        (None, None)
    };

    let Shared { states, f_rows, .. } = shared;
    let traj = Trajectory::from_parts(grid, dim, states.into_vec(), f_rows.into_vec());
    let stats = BlockStats {
        plan,
        workers: workers.into_iter().map(|w| w.counters).collect(),
        predictor_terms_per_step: pred_steps,
        corrector_terms_per_step: corr_steps,
    };
    Ok((traj, stats))
}

fn run_worker(sh: &Shared<'_>, p: usize) -> Result<WorkerResult> {
    let scheme = &sh.scheme;
    let dim = scheme.dim();
    let n_steps = sh.plan.n_steps();
    let block = sh.plan.block(p);
    let waiter = Waiter::new(&sh.abort, sh.watchdog);

    let mut counters = WorkerCounters::default();
    let per_step_len = if sh.record_work { n_steps } else { 0 };
    let mut pred_per_step = vec![0u32; per_step_len];
    let mut corr_per_step = vec![0u32; per_step_len];

    let mut acc = vec![0.0; dim];
    let mut y_pred = vec![0.0; dim];
    let mut f_pred = vec![0.0; dim];
    let mut y_next = vec![0.0; dim];

    for n in 0..n_steps {
        let tag = n as u64 + 1;
        waiter.wait_until(|| sh.published.load(Ordering::Acquire) >= n as u64)?;
        let owner = sh.plan.owner_unchecked(n);

        if p > owner {
            counters.idle_steps += 1;
            continue;
        }

        if p < owner {
            // Whole block lies below n, so all of it is published.
            // SAFETY: rows < block.end <= n are published and never rewritten.
            let f = unsafe { sh.f_rows.rows(0, block.end) };
            acc.fill(0.0);
            let tp = scheme.predictor_terms(&mut acc, f, n, block.start, block.end);
            // SAFETY: the owner consumed the previous tag before publishing step n.
            unsafe { sh.mailboxes[p][0].send(tag, &acc) };

            acc.fill(0.0);
            let tc = scheme.corrector_terms(&mut acc, f, n, block.start.max(1), block.end);
            unsafe { sh.mailboxes[p][1].send(tag, &acc) };

            counters.messages_sent += 2;
            counters.predictor_terms += tp as u64;
            counters.corrector_terms += tc as u64;
            if sh.record_work {
                pred_per_step[n] = tp as u32;
                corr_per_step[n] = tc as u32;
            }
            continue;
        }

        // Owner of step n.
        counters.owned_steps += 1;
        // SAFETY: rows 0..=n are published.
        let f = unsafe { sh.f_rows.rows(0, n + 1) };

        acc.fill(0.0);
        for sender in 0..p {
            sh.mailboxes[sender][0].recv_add(tag, &mut acc, &waiter)?;
        }
        let tp = scheme.predictor_terms(&mut acc, f, n, block.start, n + 1);
        scheme.finish_predictor(&acc, &mut y_pred);
        if let Err(e) = scheme.eval_checked(n + 1, &y_pred, &mut f_pred, "predicted state") {
            waiter.abort();
            return Err(e);
        }

        acc.fill(0.0);
        scheme.first_node_term(&mut acc, f, n);
        for sender in 0..p {
            sh.mailboxes[sender][1].recv_add(tag, &mut acc, &waiter)?;
        }
        let tc = 1 + scheme.corrector_terms(&mut acc, f, n, block.start.max(1), n + 1);
        scheme.finish_corrector(&acc, &f_pred, &mut y_next);

        // SAFETY: only the owner of step n touches row n + 1 before publication.
        let (row_y, row_f) = unsafe { (sh.states.row_mut(n + 1), sh.f_rows.row_mut(n + 1)) };
        row_y.copy_from_slice(&y_next);
        if let Err(e) = scheme.eval_checked(n + 1, row_y, row_f, "state") {
            waiter.abort();
            return Err(e);
        }
        counters.predictor_terms += tp as u64;
        counters.corrector_terms += tc as u64;
        if sh.record_work {
            pred_per_step[n] = tp as u32;
            corr_per_step[n] = tc as u32;
        }
        sh.published.store(n as u64 + 1, Ordering::Release);
    }

    Ok(WorkerResult { counters, pred_per_step, corr_per_step })
}
