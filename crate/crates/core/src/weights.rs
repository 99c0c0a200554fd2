//! Quadrature weights of the fractional Adams-Bashforth-Moulton scheme.
//!
//! With `p = α + 1`:
//!
//! ```text
//! b_n = ((n+1)^α - n^α) / Γ(α+1)                      predictor
//! a_n = ((n+2)^p - 2(n+1)^p + n^p) / Γ(α+2)           corrector, interior nodes
//! c_n = (n^p - (n-α)(n+1)^α) / Γ(α+2)                 corrector, node k = 0
//! ```
//!
//! Written as printed, the three numerators are differences of nearly equal
//! powers and lose about `log10(n)` digits. For `n >= 1` they are evaluated
//! instead as `m^(α-1)` times a convergent series in `u = 1/m`, `m = n + 1`,
//! whose terms are all positive. This keeps every weight within a few ulp of
//! the exact value, and makes the `α = 1` weights come out exactly as
//! `1, 1, 1/2`.

use rayon::prelude::*;

use crate::error::Result;
use crate::problem::check_alpha;
use crate::special::gamma_pos;

const SERIES_REL_TOL: f64 = 0.5 * f64::EPSILON;
const SERIES_MAX_TERMS: usize = 400;

/// `x^e` with `0^e = 0` for the positive exponents used here.
#[inline]
fn pow0(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

/// Sums `first + Σ t_k` where the next term is produced by `next(k, term)`.
/// All terms are nonnegative and eventually decrease geometrically.
fn positive_series(first: f64, mut next: impl FnMut(usize, f64) -> f64) -> f64 {
    let mut sum = first;
    let mut term = first;
    for k in 0..SERIES_MAX_TERMS {
        term = next(k, term);
        if term <= SERIES_REL_TOL * sum {
            sum += term;
            break;
        }
        sum += term;
    }
    sum
}

fn b_unscaled(alpha: f64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let m = (n + 1) as f64;
    let u = 1.0 / m;
    // (n+1)^α - n^α = m^(α-1) Σ_{k≥1} e_k u^(k-1),  e_1 = α,  e_{k+1} = e_k (k-α)/(k+1)
    let s = positive_series(alpha, |i, t| {
        let k = (i + 1) as f64;
        t * u * (k - alpha) / (k + 1.0)
    });
    m.powf(alpha - 1.0) * s
}

fn a_unscaled(alpha: f64, n: u64) -> f64 {
    let p = alpha + 1.0;
    if n == 0 {
        return pow0(2.0, p) - 2.0;
    }
    let m = (n + 1) as f64;
    let u2 = 1.0 / (m * m);
    // (m+1)^p - 2m^p + (m-1)^p = m^(α-1) · 2 Σ_{j≥1} C(p,2j) u^(2j-2)
    let s = positive_series(p * (p - 1.0) / 2.0, |i, t| {
        let k = 2.0 * (i + 1) as f64;
        t * u2 * (p - k) * (p - k - 1.0) / ((k + 1.0) * (k + 2.0))
    });
    m.powf(alpha - 1.0) * (2.0 * s)
}

fn c_unscaled(alpha: f64, n: u64) -> f64 {
    let p = alpha + 1.0;
    if n == 0 {
        return alpha;
    }
    let m = (n + 1) as f64;
    let u = 1.0 / m;
    // (m-1)^p - (m-p) m^α = m^(α-1) Σ_{k≥2} d_k u^(k-2),  d_2 = p(p-1)/2,  d_{k+1} = d_k (k-p)/(k+1)
    let s = positive_series(p * (p - 1.0) / 2.0, |i, t| {
        let k = (i + 2) as f64;
        t * u * (k - p) / (k + 1.0)
    });
    m.powf(alpha - 1.0) * s
}

/// Predictor weight `b_n`.
pub fn predictor_weight(alpha: f64, n: u64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(b_unscaled(alpha, n) / gamma_pos(alpha + 1.0))
}

/// Corrector weight `a_n` for history nodes `k >= 1`.
pub fn corrector_weight_a(alpha: f64, n: u64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(a_unscaled(alpha, n) / gamma_pos(alpha + 2.0))
}

/// Corrector weight `c_n` of the initial node `k = 0`.
pub fn corrector_weight_c(alpha: f64, n: u64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(c_unscaled(alpha, n) / gamma_pos(alpha + 2.0))
}

/// Weights `b`, `a`, `c` for indices `0..=N`, plus `Γ(α+2)` for the
/// corrector's final term.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    alpha: f64,
    gamma_alpha2: f64,
    b: Vec<f64>,
    a: Vec<f64>,
    c: Vec<f64>,
}

impl WeightTable {
    /// Wraps externally computed weights. All three vectors must have the
    /// same length `N + 1 >= 2`.
    pub fn from_vectors(alpha: f64, b: Vec<f64>, a: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if b.len() < 2 || a.len() != b.len() || c.len() != b.len() {
            return Err(crate::FodeError::config(format!(
                "weight vectors need equal lengths >= 2, got {}, {}, {}",
                b.len(),
                a.len(),
                c.len()
            )));
        }
        Ok(WeightTable { alpha, gamma_alpha2: gamma_pos(alpha + 2.0), b, a, c })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest index `N` in the table.
    pub fn n_max(&self) -> usize {
        self.b.len() - 1
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `Γ(α + 2)`, the divisor of the corrector's `f(t_{n+1}, y^P)` term.
    pub fn gamma_alpha2(&self) -> f64 {
        self.gamma_alpha2
    }
}

/// Fills the weight table for `n ∈ {0, …, n_steps}`. Entries are computed
/// independently (in parallel) by the same routines as the single-weight
/// functions, so they match them bitwise.
pub fn precompute_weights(alpha: f64, n_steps: usize) -> Result<WeightTable> {
    check_alpha(alpha)?;
    if n_steps == 0 {
        return Err(crate::FodeError::config("weight table needs n_steps >= 1"));
    }
    let g1 = gamma_pos(alpha + 1.0);
    let g2 = gamma_pos(alpha + 2.0);
    let rows: Vec<(f64, f64, f64)> = (0..n_steps + 1)
        .into_par_iter()
        .with_min_len(4096)
        .map(|n| {
            let n = n as u64;
            (
                b_unscaled(alpha, n) / g1,
                a_unscaled(alpha, n) / g2,
                c_unscaled(alpha, n) / g2,
            )
        })
        .collect();
    let mut b = Vec::with_capacity(rows.len());
    let mut a = Vec::with_capacity(rows.len());
    let mut c = Vec::with_capacity(rows.len());
    for (bn, an, cn) in rows {
        b.push(bn);
        a.push(an);
        c.push(cn);
    }
    Ok(WeightTable { alpha, gamma_alpha2: g2, b, a, c })
}
