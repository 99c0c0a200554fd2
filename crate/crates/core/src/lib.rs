//! Predictor-corrector (fractional Adams-Bashforth-Moulton) solvers for
//! Caputo fractional ODEs `D^α y = f(t, y)`, `0 < α <= 1`, with a serial
//! reference implementation and two parallel strategies for the O(N²)
//! history sums.
//!
//! ```
//! use fode_core::{solve, FractionalProblem, GridSpec, Strategy};
//!
//! let p = FractionalProblem::with_fn(0.5, vec![1.0], 1.0, |_t, y: &[f64], dy: &mut [f64]| dy[0] = -y[0]).unwrap();
//! let grid = GridSpec::for_problem(&p, 1000).unwrap();
//! let traj = solve(&p, grid, Strategy::Block { workers: 2 }).unwrap();
//! assert!((traj.last_state()[0] - 0.4275835761558070).abs() < 1e-3);
//! ```

// Reference values in the tests carry more digits than an f64 holds.
#![allow(clippy::excessive_precision)]

mod dd;
pub mod error;
pub mod harness;
mod history;
pub mod parallel;
pub mod problem;
mod scheme;
pub mod serial;
pub mod special;
pub mod strategy;
pub mod systems;
pub mod verify;
pub mod weights;

pub use error::{FodeError, Result};
pub use parallel::{solve_block_parallel, solve_reduction_parallel};
pub use problem::{FractionalProblem, GridSpec, Rhs};
pub use serial::{solve_serial, Trajectory};
pub use strategy::{solve, Strategy, StrategyKind};
pub use systems::NamedSystem;
pub use weights::{corrector_weight_a, corrector_weight_c, precompute_weights, predictor_weight, WeightTable};
