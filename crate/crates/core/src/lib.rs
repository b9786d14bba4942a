//! Verification and Monte Carlo testing toolkit for characterizations of the
//! exponential law by linear forms with random coefficients.
//!
//! - [`distributions`]: sampling and exact Laplace transforms for the null
//!   family and a roster of positive counterexamples.
//! - [`forms`]: simulation of the random-coefficient linear forms.
//! - [`laplace`]: residuals of every characterization equation.
//! - [`series`]: truncated power series and coefficient recursions.
//! - [`contraction`]: the weighted metric, the operator and its contraction
//!   factor.
//! - [`stats`]: calibrated statistical tests built on the characterizations.
//! - [`cli`]: experiment orchestration behind the `expochar` binary.

pub mod cli;
pub mod contraction;
pub mod distributions;
pub mod error;
pub mod forms;
pub mod laplace;
mod quad;
pub mod rng;
pub mod series;
pub mod stats;

pub use distributions::{DistSpec, SampleBatch};
pub use error::{Error, Result};
pub use forms::{Coupling, FormParams, PairedSample};
pub use laplace::{EvalGrid, LtFunction, ResidualReport};
pub use series::TaylorSeries;

/// Shortest round-trip text for a float; scientific notation outside
/// `[1e-5, 1e16)`.
pub(crate) fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}
