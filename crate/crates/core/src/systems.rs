//! Right-hand sides: analytic test problems and the Hindmarsh-Rose neuron.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{FodeError, Result};
use crate::problem::{check_alpha, FractionalProblem, Rhs};
use crate::special::gamma_pos;

/// `f(t, y) = value`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRhs {
    value: Vec<f64>,
}

pub fn rhs_constant(value: Vec<f64>) -> Result<ConstantRhs> {
    if value.is_empty() || value.iter().any(|v| !v.is_finite()) {
        return Err(FodeError::domain(format!("constant right-hand side must be finite and non-empty, got {value:?}")));
    }
    Ok(ConstantRhs { value })
}

impl Rhs for ConstantRhs {
    fn eval(&self, _t: f64, _y: &[f64], dy: &mut [f64]) {
        dy.copy_from_slice(&self.value);
    }

    fn dim(&self) -> Option<usize> {
        Some(self.value.len())
    }
}

/// `f(t, y) = Γ(β+1)/Γ(β+1-α) · t^(β-α)`, whose solution from `y0 = 0` is
/// `y(t) = t^β`. Scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawRhs {
    coef: f64,
    exponent: f64,
}

/// Requires `β >= α` so that `f` stays finite at `t = 0`.
pub fn rhs_power_law(alpha: f64, beta: f64) -> Result<PowerLawRhs> {
    check_alpha(alpha)?;
    if !(beta.is_finite() && beta >= alpha) {
        return Err(FodeError::domain(format!("power-law exponent must satisfy beta >= alpha, got beta = {beta}, alpha = {alpha}")));
    }
    Ok(PowerLawRhs { coef: gamma_pos(beta + 1.0) / gamma_pos(beta + 1.0 - alpha), exponent: beta - alpha })
}

impl PowerLawRhs {
    pub fn coefficient(&self) -> f64 {
        self.coef
    }
}

impl Rhs for PowerLawRhs {
    fn eval(&self, t: f64, _y: &[f64], dy: &mut [f64]) {
        dy[0] = self.coef * t.powf(self.exponent);
    }

    fn dim(&self) -> Option<usize> {
        Some(1)
    }
}

/// `f(t, y) = λ y`, componentwise. Solution `y0 · E_α(λ t^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRhs {
    lambda: f64,
}

pub fn rhs_linear(lambda: f64) -> Result<LinearRhs> {
    if !lambda.is_finite() {
        return Err(FodeError::domain(format!("lambda must be finite, got {lambda}")));
    }
    Ok(LinearRhs { lambda })
}

impl Rhs for LinearRhs {
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        for (d, v) in dy.iter_mut().zip(y) {
            *d = self.lambda * v;
        }
    }
}

/// Constants of the three-variable Hindmarsh-Rose model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HindmarshRoseParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub r: f64,
    pub s: f64,
    pub x_rest: f64,
    pub i_ext: f64,
}

impl Default for HindmarshRoseParams {
    /// The 1984 bursting regime.
    fn default() -> Self {
        HindmarshRoseParams { a: 1.0, b: 3.0, c: 1.0, d: 5.0, r: 0.006, s: 4.0, x_rest: -1.6, i_ext: 3.25 }
    }
}

impl HindmarshRoseParams {
    pub const FIELD_NAMES: [&'static str; 8] = ["a", "b", "c", "d", "r", "s", "x_rest", "i_ext"];

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.r, self.s, self.x_rest, self.i_ext];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(FodeError::domain("Hindmarsh-Rose parameters must be finite"));
        }
        if self.r <= 0.0 {
            return Err(FodeError::domain(format!("Hindmarsh-Rose r must be positive, got {}", self.r)));
        }
        Ok(())
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let [a, b, c, d, r, s, x_rest, i_ext] = <[f64; 8]>::try_from(v).map_err(|_| {
            FodeError::config(format!("Hindmarsh-Rose takes 8 parameters (a, b, c, d, r, s, x_rest, i_ext), got {}", v.len()))
        })?;
        let p = HindmarshRoseParams { a, b, c, d, r, s, x_rest, i_ext };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HindmarshRose {
    params: HindmarshRoseParams,
}

pub fn rhs_hindmarsh_rose(params: HindmarshRoseParams) -> Result<HindmarshRose> {
    params.validate()?;
    Ok(HindmarshRose { params })
}

impl Rhs for HindmarshRose {
    #[inline]
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let HindmarshRoseParams { a, b, c, d, r, s, x_rest, i_ext } = self.params;
        let (x, v, z) = (y[0], y[1], y[2]);
        let x2 = x * x;
        dy[0] = v - a * x2 * x + b * x2 - z + i_ext;
        dy[1] = c - d * x2 - v;
        dy[2] = r * (s * (x - x_rest) - z);
    }

    fn dim(&self) -> Option<usize> {
        Some(3)
    }
}

/// Systems selectable by name from the CLI and the C interface.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedSystem {
    /// `f ≡ 0` in the dimension of the initial state.
    Zero,
    Constant { value: Vec<f64> },
    PowerLaw { beta: f64 },
    Linear { lambda: f64 },
    HindmarshRose(HindmarshRoseParams),
}

/// Default initial state of the Hindmarsh-Rose system.
pub const HINDMARSH_ROSE_Y0: [f64; 3] = [-1.6, 0.0, 0.0];

/// Bounds on `|x|`, `|y|`, `|z|` for the default model started from
/// [`HINDMARSH_ROSE_Y0`] with `0.9 <= α <= 1`. A run at α = 0.9 over
/// `[0, 1000]` stays inside `x ∈ [-1.8, 2.3]`, `y ∈ [-14.7, 1.0]`,
/// `z ∈ [0, 4.3]`.
pub const HINDMARSH_ROSE_ENVELOPE: [f64; 3] = [5.0, 25.0, 10.0];

pub fn within_hindmarsh_rose_envelope(state: &[f64]) -> bool {
    state.len() == 3 && state.iter().zip(HINDMARSH_ROSE_ENVELOPE).all(|(v, b)| v.is_finite() && v.abs() <= b)
}

impl NamedSystem {
    pub const NAMES: [&'static str; 5] = ["zero", "constant", "power-law", "linear", "hindmarsh-rose"];

    pub fn name(&self) -> &'static str {
        match self {
            NamedSystem::Zero => "zero",
            NamedSystem::Constant { .. } => "constant",
            NamedSystem::PowerLaw { .. } => "power-law",
            NamedSystem::Linear { .. } => "linear",
            NamedSystem::HindmarshRose(_) => "hindmarsh-rose",
        }
    }

    /// Builds a system from its name and a flat parameter list:
    /// `constant` takes the value vector, `power-law` `[beta]` (default 2),
    /// `linear` `[lambda]` (default -1), `hindmarsh-rose` all eight constants
    /// or none for the defaults.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let kind: NamedSystem = name.parse()?;
        Ok(match kind {
            NamedSystem::Zero => {
                expect_params(name, params, 0)?;
                NamedSystem::Zero
            }
            NamedSystem::Constant { .. } => NamedSystem::Constant {
                value: if params.is_empty() { vec![1.0] } else { params.to_vec() },
            },
            NamedSystem::PowerLaw { beta } => match params {
                [] => NamedSystem::PowerLaw { beta },
                [b] => NamedSystem::PowerLaw { beta: *b },
                _ => return Err(expect_params(name, params, 1).unwrap_err()),
            },
            NamedSystem::Linear { lambda } => match params {
                [] => NamedSystem::Linear { lambda },
                [l] => NamedSystem::Linear { lambda: *l },
                _ => return Err(expect_params(name, params, 1).unwrap_err()),
            },
            NamedSystem::HindmarshRose(p) => {
                if params.is_empty() {
                    NamedSystem::HindmarshRose(p)
                } else {
                    NamedSystem::HindmarshRose(HindmarshRoseParams::from_slice(params)?)
                }
            }
        })
    }

    pub fn default_y0(&self) -> Vec<f64> {
        match self {
            NamedSystem::Zero => vec![0.0],
            NamedSystem::Constant { value } => vec![0.0; value.len()],
            NamedSystem::PowerLaw { .. } => vec![0.0],
            NamedSystem::Linear { .. } => vec![1.0],
            NamedSystem::HindmarshRose(_) => HINDMARSH_ROSE_Y0.to_vec(),
        }
    }

    pub fn rhs(&self, alpha: f64, dim: usize) -> Result<Arc<dyn Rhs>> {
        Ok(match self {
            NamedSystem::Zero => Arc::new(rhs_constant(vec![0.0; dim.max(1)])?),
            NamedSystem::Constant { value } => Arc::new(rhs_constant(value.clone())?),
            NamedSystem::PowerLaw { beta } => Arc::new(rhs_power_law(alpha, *beta)?),
            NamedSystem::Linear { lambda } => Arc::new(rhs_linear(*lambda)?),
            NamedSystem::HindmarshRose(p) => Arc::new(rhs_hindmarsh_rose(*p)?),
        })
    }

    /// Assembles the problem, using [`Self::default_y0`] when `y0` is `None`.
    pub fn problem(&self, alpha: f64, t_end: f64, y0: Option<Vec<f64>>) -> Result<FractionalProblem> {
        let y0 = y0.unwrap_or_else(|| self.default_y0());
        let rhs = self.rhs(alpha, y0.len())?;
        FractionalProblem::new(alpha, y0, t_end, rhs)
    }
}

fn expect_params(name: &str, params: &[f64], max: usize) -> Result<()> {
    if params.len() > max {
        Err(FodeError::config(format!("system '{name}' takes at most {max} parameter(s), got {}", params.len())))
    } else {
        Ok(())
    }
}

impl FromStr for NamedSystem {
    type Err = FodeError;

    /// Parses the name only; parameters take their defaults.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "constant-zero" => Ok(NamedSystem::Zero),
            "constant" => Ok(NamedSystem::Constant { value: vec![1.0] }),
            "power-law" => Ok(NamedSystem::PowerLaw { beta: 2.0 }),
            "linear" => Ok(NamedSystem::Linear { lambda: -1.0 }),
            "hindmarsh-rose" => Ok(NamedSystem::HindmarshRose(HindmarshRoseParams::default())),
            other => Err(FodeError::config(format!(
                "unknown system '{other}' (expected one of {})",
                NamedSystem::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for NamedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(rhs: &dyn Rhs, t: f64, y: &[f64]) -> Vec<f64> {
        let mut dy = vec![0.0; y.len()];
        rhs.eval(t, y, &mut dy);
        dy
    }

    #[test]
    fn constant_values() {
        let r = rhs_constant(vec![0.0]).unwrap();
        assert_eq!(eval(&r, 0.3, &[5.0]), vec![0.0]);
        let r = rhs_constant(vec![1.0]).unwrap();
        assert_eq!(eval(&r, 7.0, &[-2.0]), vec![1.0]);
        let r = rhs_constant(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(eval(&r, 1.0, &[0.0; 3]), vec![1.0, 2.0, 3.0]);
        assert!(rhs_constant(vec![f64::NAN]).is_err());
    }

    #[test]
    fn power_law_values() {
        let r = rhs_power_law(0.5, 2.0).unwrap();
        // 2 / Γ(2.5) from 60-digit arithmetic
        let expect = 1.5045055561273500985;
        assert!((eval(&r, 1.0, &[0.0])[0] - expect).abs() <= 1e-15 * expect);
        assert_eq!(eval(&r, 0.0, &[0.0])[0], 0.0);
        let r = rhs_power_law(1.0, 1.0).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!((eval(&r, t, &[0.0])[0] - 1.0).abs() < 1e-15);
        }
        assert!(matches!(rhs_power_law(0.5, 0.4), Err(FodeError::Domain(_))));
        assert!(rhs_power_law(1.5, 2.0).is_err());
    }

    #[test]
    fn linear_values() {
        let r = rhs_linear(0.0).unwrap();
        assert_eq!(eval(&r, 1.0, &[3.0])[0], 0.0);
        let r = rhs_linear(-1.0).unwrap();
        assert_eq!(eval(&r, 1.0, &[3.0, -2.0]), vec![-3.0, 2.0]);
        assert!(rhs_linear(f64::INFINITY).is_err());
    }

    #[test]
    fn hindmarsh_rose_at_origin() {
        let r = rhs_hindmarsh_rose(HindmarshRoseParams::default()).unwrap();
        let dy = eval(&r, 0.0, &[0.0, 0.0, 0.0]);
        assert!((dy[0] - 3.25).abs() < 1e-15);
        assert!((dy[1] - 1.0).abs() < 1e-15);
        assert!((dy[2] - 0.0384).abs() < 1e-15);
    }

    #[test]
    fn hindmarsh_rose_fixed_point() {
        let p = HindmarshRoseParams { i_ext: 0.0, x_rest: 0.0, c: 0.0, ..Default::default() };
        let r = rhs_hindmarsh_rose(p).unwrap();
        assert_eq!(eval(&r, 12.0, &[0.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn hindmarsh_rose_validation() {
        let bad = HindmarshRoseParams { r: 0.0, ..Default::default() };
        assert!(rhs_hindmarsh_rose(bad).is_err());
        let bad = HindmarshRoseParams { a: f64::NAN, ..Default::default() };
        assert!(rhs_hindmarsh_rose(bad).is_err());
        assert!(HindmarshRoseParams::from_slice(&[1.0; 7]).is_err());
        let p = HindmarshRoseParams::from_slice(&[1.0, 3.0, 1.0, 5.0, 0.006, 4.0, -1.6, 3.25]).unwrap();
        assert_eq!(p, HindmarshRoseParams::default());
    }

    #[test]
    fn named_systems() {
        for name in NamedSystem::NAMES {
            let sys = NamedSystem::from_name(name, &[]).unwrap();
            assert_eq!(sys.name(), name);
            let p = sys.problem(0.7, 1.0, None).unwrap();
            assert_eq!(p.dim(), sys.default_y0().len());
        }
        assert!(NamedSystem::from_name("lorenz", &[]).is_err());
        assert!(NamedSystem::from_name("zero", &[1.0]).is_err());
        assert!(NamedSystem::from_name("linear", &[1.0, 2.0]).is_err());
        assert_eq!(NamedSystem::from_name("linear", &[-2.0]).unwrap(), NamedSystem::Linear { lambda: -2.0 });
        // dimension mismatch between y0 and a fixed-size system
        let hr = NamedSystem::from_name("hindmarsh-rose", &[]).unwrap();
        assert!(hr.problem(0.9, 1.0, Some(vec![0.0; 2])).is_err());
        let zero = NamedSystem::Zero.problem(0.5, 1.0, Some(vec![3.0, 4.0])).unwrap();
        assert_eq!(zero.dim(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn hindmarsh_rose_is_autonomous(
            t1 in -1e3f64..1e3, t2 in -1e3f64..1e3,
            x in -3.0f64..3.0, y in -20.0f64..5.0, z in -5.0f64..5.0,
        ) {
            let r = rhs_hindmarsh_rose(HindmarshRoseParams::default()).unwrap();
            let a = eval(&r, t1, &[x, y, z]);
            let b = eval(&r, t2, &[x, y, z]);
            prop_assert_eq!(a, b);
        }
    }
}
