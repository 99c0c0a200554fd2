use std::ops::Range;

use crate::error::{FodeError, Result};

/// Assignment of contiguous step blocks to workers. Block `p` is
/// `[p·B, (p+1)·B) ∩ [0, N)` with `B = ⌈N/P⌉`; when `P ∤ N` the last
/// non-empty block is shorter, and trailing blocks can be empty if
/// `(P-1)·B >= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    n_steps: usize,
    n_workers: usize,
    block_size: usize,
    blocks: Vec<Range<usize>>,
}

pub fn make_partition(n_steps: usize, n_workers: usize) -> Result<PartitionPlan> {
    if n_workers == 0 {
        return Err(FodeError::config("need at least one worker"));
    }
    if n_workers > n_steps {
        return Err(FodeError::config(format!("{n_workers} workers for only {n_steps} steps")));
    }
    let block_size = n_steps.div_ceil(n_workers);
    let blocks = (0..n_workers)
        .map(|p| (p * block_size).min(n_steps)..((p + 1) * block_size).min(n_steps))
        .collect();
    Ok(PartitionPlan { n_steps, n_workers, block_size, blocks })
}

impl PartitionPlan {
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_workers(&self) -> usize {
        self.n_workers
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block(&self, worker: usize) -> Range<usize> {
        self.blocks[worker].clone()
    }

    /// Worker whose block contains step `n`.
    pub fn owner(&self, n: usize) -> Result<usize> {
        if n >= self.n_steps {
            return Err(FodeError::Index { index: n, limit: self.n_steps });
        }
        Ok(self.owner_unchecked(n))
    }

    #[inline]
    pub(crate) fn owner_unchecked(&self, n: usize) -> usize {
        (n / self.block_size).min(self.n_workers - 1)
    }

    /// Steps during which `worker` waits for the iteration to reach its block,
    /// as a fraction of all steps.
    pub fn idle_fraction(&self, worker: usize) -> Result<f64> {
        Ok(self.idle_steps(worker)? as f64 / self.n_steps as f64)
    }

    /// Number of steps `n` with `owner(n) < worker`.
    pub fn idle_steps(&self, worker: usize) -> Result<usize> {
        if worker >= self.n_workers {
            return Err(FodeError::Index { index: worker, limit: self.n_workers });
        }
        Ok(self.blocks[worker].start)
    }
}

/// Free-function form of [`PartitionPlan::owner`].
pub fn owner(plan: &PartitionPlan, n: usize) -> Result<usize> {
    plan.owner(n)
}

/// Free-function form of [`PartitionPlan::idle_fraction`].
pub fn idle_fraction(plan: &PartitionPlan, worker: usize) -> Result<f64> {
    plan.idle_fraction(worker)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_split() {
        let plan = make_partition(6, 3).unwrap();
        assert_eq!(plan.blocks(), &[0..2, 2..4, 4..6]);
        assert_eq!(owner(&plan, 0).unwrap(), 0);
        assert_eq!(owner(&plan, 5).unwrap(), 2);
    }

    #[test]
    fn truncated_last_block() {
        let plan = make_partition(7, 3).unwrap();
        assert_eq!(plan.block_size(), 3);
        assert_eq!(plan.blocks(), &[0..3, 3..6, 6..7]);
        assert_eq!(owner(&plan, 6).unwrap(), 2);
    }

    #[test]
    fn cluster_sized_partition() {
        let plan = make_partition(100_000, 64).unwrap();
        assert_eq!(plan.block_size(), 1563);
        assert_eq!(plan.block(63).len(), 100_000 - 63 * 1563);
        assert_eq!(plan.block(63).len(), 1531);
    }

    #[test]
    fn errors() {
        assert!(make_partition(3, 4).is_err());
        assert!(make_partition(3, 0).is_err());
        let plan = make_partition(6, 3).unwrap();
        assert!(matches!(plan.owner(6), Err(FodeError::Index { .. })));
        assert!(plan.idle_fraction(3).is_err());
    }

    #[test]
    fn idle_fractions() {
        let plan = make_partition(1000, 4).unwrap();
        assert_eq!(idle_fraction(&plan, 0).unwrap(), 0.0);
        assert_eq!(idle_fraction(&plan, 3).unwrap(), 0.75);
        let single = make_partition(10, 1).unwrap();
        assert_eq!(idle_fraction(&single, 0).unwrap(), 0.0);
    }

    #[test]
    fn empty_trailing_blocks() {
        // B = ⌈5/4⌉ = 2 leaves nothing for worker 3
        let plan = make_partition(5, 4).unwrap();
        assert_eq!(plan.blocks(), &[0..2, 2..4, 4..5, 5..5]);
        assert_eq!(plan.owner(4).unwrap(), 2);
        assert_eq!(plan.idle_fraction(3).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn blocks_cover_and_owner_is_unique(n in 1usize..100_000, p_seed in 0usize..1_000_000) {
            let p = 1 + p_seed % n.min(512);
            let plan = make_partition(n, p).unwrap();
            prop_assert_eq!(plan.blocks().len(), p);
            let mut next = 0;
            for b in plan.blocks() {
                prop_assert_eq!(b.start, next);
                prop_assert!(b.end >= b.start);
                next = b.end;
            }
            prop_assert_eq!(next, n);
            for idx in [0, n / 3, n / 2, n - 1] {
                let o = plan.owner(idx).unwrap();
                prop_assert!(plan.block(o).contains(&idx));
            }
        }
    }
}
