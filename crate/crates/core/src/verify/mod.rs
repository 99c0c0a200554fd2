//! Analytic oracles and convergence-order estimation.

mod suite;

use std::fmt::Write as _;

use crate::error::{FodeError, Result};
use crate::problem::check_alpha;
use crate::dd::{ln_gamma_dd, DoubleDouble};

pub use suite::{run_verify_suite, run_verify_suite_with, CheckResult, Solver, VerifyOutcome};

/// Largest `|z|` accepted by [`mittag_leffler`].
pub const MITTAG_LEFFLER_MAX_ARG: f64 = 10.0;

const ML_MAX_TERMS: usize = 100_000;
// Double-double carries ~32 digits; keep at least 16 after cancellation.
const ML_MAX_CANCELLATION: f64 = 1e15;

/// Mittag-Leffler function `E_α(z) = Σ_k z^k / Γ(αk + 1)` for
/// `0 < α <= 1`, `|z| <= 10`.
///
/// Terms are formed as `±exp(k ln|z| - ln Γ(αk+1))` and summed in
/// double-double arithmetic until the next term drops below `1e-16` of the
/// partial sum (at least five terms). Arguments for which the terms exceed
/// the floating-point range, or cancel by more than fifteen orders of
/// magnitude, are reported as out of range rather than returned inaccurate.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !z.is_finite() {
        return Err(FodeError::domain(format!("Mittag-Leffler argument must be finite, got {z}")));
    }
    if z.abs() > MITTAG_LEFFLER_MAX_ARG {
        return Err(FodeError::OutOfRange(format!(
            "|z| = {} exceeds the validated series range {MITTAG_LEFFLER_MAX_ARG}",
            z.abs()
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let ln_abs_z = DoubleDouble::new(z.abs()).ln();
    let negative = z < 0.0;

    let mut sum = DoubleDouble::ONE;
    let mut max_term = 1.0f64;
    let mut k = 1usize;
    loop {
        let arg = DoubleDouble::from_prod(alpha, k as f64) + DoubleDouble::ONE;
        let ln_term = ln_abs_z.mul_f64(k as f64) - ln_gamma_dd(arg);
        let mut term = ln_term.exp();
        if !term.is_finite() {
            return Err(FodeError::OutOfRange(format!(
                "series terms of E_{alpha}({z}) exceed the floating-point range"
            )));
        }
        if negative && k % 2 == 1 {
            term = -term;
        }
        let small = term.hi.abs() < 1e-16 * sum.hi.abs();
        if k >= 5 && small {
            break;
        }
        sum = sum + term;
        max_term = max_term.max(term.hi.abs());
        k += 1;
        if k > ML_MAX_TERMS {
            return Err(FodeError::OutOfRange(format!("E_{alpha}({z}) series did not converge")));
        }
    }
    let value = sum.to_f64();
    if !value.is_finite() || max_term > ML_MAX_CANCELLATION * value.abs() {
        return Err(FodeError::OutOfRange(format!(
            "E_{alpha}({z}) loses too many digits to cancellation (largest term {max_term:e})"
        )));
    }
    Ok(value)
}

/// `t^β`, the exact solution carried by the power-law right-hand side.
pub fn exact_power_law(beta: f64, t: f64) -> f64 {
    t.powf(beta)
}

/// Least-squares slope of `ln(error)` against `ln(h)`, `h ∝ 1/N`.
pub fn observed_order(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(FodeError::DegenerateData(format!("need at least 2 refinement levels, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(FodeError::DegenerateData("step counts must be strictly increasing".into()));
    }
    if let Some(&(n, e)) = points.iter().find(|(_, e)| !(e.is_finite() && *e > 0.0)) {
        return Err(FodeError::DegenerateData(format!("error at N = {n} is {e}, must be positive")));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| -(n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Errors of one problem over a sequence of refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub problem: String,
    /// `(N, sup-norm error over the grid)`, `N` strictly increasing.
    pub points: Vec<(usize, f64)>,
    pub observed_order: f64,
    /// Absolute error at `t = T` for each `N`.
    pub terminal_errors: Vec<f64>,
}

impl ConvergenceReport {
    pub fn from_points(alpha: f64, problem: impl Into<String>, points: Vec<(usize, f64)>, terminal_errors: Vec<f64>) -> Result<Self> {
        let observed_order = observed_order(&points)?;
        Ok(ConvergenceReport { alpha, problem: problem.into(), points, observed_order, terminal_errors })
    }

    pub const CSV_HEADER: &'static str = "alpha,problem,N,sup_error";

    /// Header, one row per refinement level, then `observed_order,<value>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        self.write_rows(&mut out);
        out
    }

    pub(crate) fn write_rows(&self, out: &mut String) {
        for &(n, e) in &self.points {
            let _ = writeln!(out, "{},{},{},{:.16e}", self.alpha, self.problem, n, e);
        }
        let _ = writeln!(out, "observed_order,{:.6}", self.observed_order);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erfc;

    #[test]
    fn unit_order_is_exp() {
        assert_eq!(mittag_leffler(1.0, 0.0).unwrap(), 1.0);
        let e = mittag_leffler(1.0, 1.0).unwrap();
        assert!((e - std::f64::consts::E).abs() <= 1e-15 * e);
        for i in 0..=100 {
            let z = -5.0 + 0.1 * i as f64;
            let v = mittag_leffler(1.0, z).unwrap();
            let want = z.exp();
            assert!(((v - want) / want).abs() <= 1e-13, "z = {z}: {v} vs {want}");
        }
    }

    #[test]
    fn half_order_closed_form() {
        // E_{1/2}(z) = exp(z^2) erfc(-z)
        let v = mittag_leffler(0.5, 1.0).unwrap();
        // 60-digit reference: e·erfc(-1)
        assert!((v - 5.0089800807622834663).abs() <= 1e-14 * v);
        // statrs' erfc is good to about 1e-11, enough for a dense sweep
        for i in 0..=60 {
            let z = -3.0 + 0.1 * i as f64;
            let v = mittag_leffler(0.5, z).unwrap();
            let want = (z * z).exp() * erfc(-z);
            assert!(((v - want) / want).abs() <= 1e-9, "z = {z}: {v} vs {want}");
        }
        // 40-digit values of exp(z^2) erfc(-z)
        for (z, want) in [
            (-0.5, 0.61569034419292587487),
            (0.5, 1.9523604891825570933),
            (1.5, 18.653886256262733939),
            (2.5, 1035.8148429726229083),
            (4.0, 17772220.904016287648),
            (-2.0, 0.25539567631050574387),
            (-3.0, 0.17900115118138995042),
            (-5.0, 0.11070463773306862637),
        ] {
            let v = mittag_leffler(0.5, z).unwrap();
            assert!(((v - want) / want).abs() <= 1e-14, "z = {z}: {v} vs {want}");
        }
        // E_{1/2}(-1) = e·erfc(1)
        let v = mittag_leffler(0.5, -1.0).unwrap();
        assert!((v - 0.42758357615580700441).abs() <= 1e-15);
    }

    #[test]
    fn zero_argument_and_range() {
        for alpha in [0.1, 0.5, 0.9, 1.0] {
            assert_eq!(mittag_leffler(alpha, 0.0).unwrap(), 1.0);
        }
        assert!(matches!(mittag_leffler(0.5, 10.5), Err(FodeError::OutOfRange(_))));
        assert!(matches!(mittag_leffler(0.0, 1.0), Err(FodeError::Domain(_))));
        assert!(mittag_leffler(0.5, f64::NAN).is_err());
        // cancellation beyond double-double precision is refused, not guessed
        assert!(matches!(mittag_leffler(0.5, -10.0), Err(FodeError::OutOfRange(_))));
    }

    #[test]
    fn increasing_in_z() {
        for alpha in [0.5, 0.7, 0.9, 1.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=100 {
                let z = -5.0 + 0.1 * i as f64;
                let v = mittag_leffler(alpha, z).unwrap();
                assert!(v > prev, "alpha = {alpha}, z = {z}");
                prev = v;
            }
        }
    }

    #[test]
    fn power_law_values() {
        assert_eq!(exact_power_law(2.0, 0.0), 0.0);
        assert_eq!(exact_power_law(2.0, 1.0), 1.0);
        assert!((exact_power_law(1.5, 0.5) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-16);
    }

    #[test]
    fn order_estimates() {
        assert!((observed_order(&[(100, 1e-2), (200, 2.5e-3)]).unwrap() - 2.0).abs() < 1e-12);
        assert!(observed_order(&[(100, 1e-2), (200, 1e-2)]).unwrap().abs() < 1e-12);
        assert!(observed_order(&[(100, 1e-2)]).is_err());
        assert!(observed_order(&[(100, 1e-2), (200, 0.0)]).is_err());
        assert!(observed_order(&[(200, 1e-2), (100, 1e-3)]).is_err());
    }

    #[test]
    fn report_csv() {
        let r = ConvergenceReport::from_points(0.5, "power-law", vec![(100, 1e-2), (200, 2.5e-3)], vec![1e-2, 2.5e-3]).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "alpha,problem,N,sup_error");
        assert!(lines[1].starts_with("0.5,power-law,100,1.0000000000000000e-2"));
        assert_eq!(lines[3], "observed_order,2.000000");
    }
}
