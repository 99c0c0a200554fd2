//! Synchronization pieces shared by the worker strategies: a row buffer
//! with a single writer per row, sequence-tagged mailboxes, and a bounded
//! wait loop with a watchdog.

use std::cell::UnsafeCell;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::error::{FodeError, Result};

/// Row-major `f64` buffer shared between workers.
///
/// Safety contract: a row is written by exactly one thread, and is read by
/// other threads only after that write has been published through an
/// `Ordering::Release` store that the reader observed with
/// `Ordering::Acquire`. Readers and the writer never touch the same row
/// concurrently.
pub(crate) struct SharedRows {
    data: Box<[UnsafeCell<f64>]>,
    dim: usize,
}

unsafe impl Sync for SharedRows {}

impl SharedRows {
    pub fn new(rows: usize, dim: usize) -> Self {
        let data = (0..rows * dim).map(|_| UnsafeCell::new(0.0)).collect();
        SharedRows { data, dim }
    }

    /// # Safety
    /// Rows `k0..k1` must be published to the calling thread and not written
    /// while the returned slice lives.
    #[inline]
    pub unsafe fn rows(&self, k0: usize, k1: usize) -> &[f64] {
        let cells = &self.data[k0 * self.dim..k1 * self.dim];
        // UnsafeCell<f64> has the same layout as f64.
        std::slice::from_raw_parts(cells.as_ptr() as *const f64, cells.len())
    }

    /// # Safety
    /// The caller must be the only thread accessing row `k` until it
    /// publishes it.
    #[inline]
    #[allow(clippy::mut_from_ref)]
    pub unsafe fn row_mut(&self, k: usize) -> &mut [f64] {
        let cells = &self.data[k * self.dim..(k + 1) * self.dim];
        std::slice::from_raw_parts_mut(cells.as_ptr() as *mut f64, cells.len())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data.into_vec().into_iter().map(UnsafeCell::into_inner).collect()
    }
}

/// Single-slot mailbox carrying a `dim`-vector tagged with a sequence
/// number. The protocol guarantees the receiver has consumed tag `s` before
/// the sender writes tag `s' > s`.
pub(crate) struct Mailbox {
    tag: AtomicU64,
    value: UnsafeCell<Vec<f64>>,
}

unsafe impl Sync for Mailbox {}

impl Mailbox {
    pub fn new(dim: usize) -> Self {
        Mailbox { tag: AtomicU64::new(0), value: UnsafeCell::new(vec![0.0; dim]) }
    }

    /// # Safety
    /// No receiver may be reading this mailbox (see the type-level contract).
    pub unsafe fn send(&self, tag: u64, value: &[f64]) {
        (*self.value.get()).copy_from_slice(value);
        self.tag.store(tag, Ordering::Release);
    }

    /// Waits for `tag` and adds the carried vector onto `acc`.
    pub fn recv_add(&self, tag: u64, acc: &mut [f64], waiter: &Waiter) -> Result<()> {
        waiter.wait_until(|| self.tag.load(Ordering::Acquire) >= tag)?;
        // SAFETY: the Acquire load above observed the sender's Release store,
        // and the sender does not write again before the next publication.
        let v = unsafe { &*self.value.get() };
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
        Ok(())
    }
}

/// Spin-then-yield wait with a shared abort flag and a watchdog timeout.
pub(crate) struct Waiter<'a> {
    abort: &'a AtomicBool,
    timeout: Duration,
    spins: u32,
}

impl<'a> Waiter<'a> {
    pub fn new(abort: &'a AtomicBool, timeout: Duration) -> Self {
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        // Spinning only helps when the thread we wait for can run at the same time.
        let spins = if cores > 1 { 4096 } else { 0 };
        Waiter { abort, timeout, spins }
    }

    pub fn wait_until(&self, mut ready: impl FnMut() -> bool) -> Result<()> {
        for _ in 0..self.spins {
            if ready() {
                return Ok(());
            }
            std::hint::spin_loop();
        }
        let start = Instant::now();
        let mut polls = 0u32;
        loop {
            if ready() {
                return Ok(());
            }
            if self.abort.load(Ordering::Relaxed) {
                return Err(FodeError::Strategy("aborted by another worker".into()));
            }
            polls = polls.wrapping_add(1);
            if polls % 256 == 0 && start.elapsed() > self.timeout {
                self.abort.store(true, Ordering::Relaxed);
                return Err(FodeError::Strategy(format!(
                    "watchdog: no progress for {:.1} s",
                    self.timeout.as_secs_f64()
                )));
            }
            std::thread::yield_now();
        }
    }

    pub fn abort(&self) {
        self.abort.store(true, Ordering::Relaxed);
    }
}

/// Sets the abort flag if the owning thread unwinds.
pub(crate) struct AbortOnPanic<'a>(pub &'a AtomicBool);

impl Drop for AbortOnPanic<'_> {
    fn drop(&mut self) {
        if std::thread::panicking() {
            self.0.store(true, Ordering::Relaxed);
        }
    }
}

/// Picks the most informative error out of the workers' results: numerical
/// failures first, then watchdog and other strategy errors.
pub(crate) fn first_error(errors: Vec<FodeError>) -> Option<FodeError> {
    let rank = |e: &FodeError| match e {
        FodeError::Step { .. } => 0,
        FodeError::Strategy(msg) if msg.starts_with("aborted") => 3,
        FodeError::Strategy(_) => 2,
        _ => 1,
    };
    errors.into_iter().min_by_key(rank)
}
