//! Weighted history sums `Σ w_{n-k} f_k`, the inner loop of every strategy.
//!
//! All sums run in ascending `k` and add each term onto the running
//! accumulator, one component at a time. The fixed-dimension kernels only
//! keep the accumulators in registers; their arithmetic is identical to the
//! generic loop, so every strategy sees the same rounding for the same
//! summation ranges.

/// Adds `Σ_{k=k0}^{k1-1} weights[n-k] · f_k` onto `acc`, with `f` stored
/// row-major (`dim` entries per row). Requires `k0 <= k1 <= n + 1`.
/// Returns the number of terms.
#[inline]
pub(crate) fn accumulate(
    acc: &mut [f64],
    weights: &[f64],
    f: &[f64],
    dim: usize,
    n: usize,
    k0: usize,
    k1: usize,
) -> usize {
    if k0 >= k1 {
        return 0;
    }
    debug_assert!(k1 <= n + 1);
    let fs = &f[k0 * dim..k1 * dim];
    // weights[n-k] for k = k0..k1 is weights[n+1-k1 ..= n-k0] read backwards
    let ws = &weights[n + 1 - k1..=n - k0];
    match dim {
        1 => fixed::<1>(acc, ws, fs),
        2 => fixed::<2>(acc, ws, fs),
        3 => fixed::<3>(acc, ws, fs),
        4 => fixed::<4>(acc, ws, fs),
        _ => generic(acc, ws, fs, dim),
    }
    k1 - k0
}

#[inline]
fn fixed<const D: usize>(acc: &mut [f64], ws: &[f64], fs: &[f64]) {
    let mut s = [0.0f64; D];
    s.copy_from_slice(&acc[..D]);
    for (w, fk) in ws.iter().rev().zip(fs.chunks_exact(D)) {
        for j in 0..D {
            s[j] += w * fk[j];
        }
    }
    acc[..D].copy_from_slice(&s);
}

fn generic(acc: &mut [f64], ws: &[f64], fs: &[f64], dim: usize) {
    for (w, fk) in ws.iter().rev().zip(fs.chunks_exact(dim)) {
        for (a, v) in acc.iter_mut().zip(fk) {
            *a += w * v;
        }
    }
}
