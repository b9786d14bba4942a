//! The weighted metric `d(ζ1, ζ2) = ∫_0^∞ |ζ1 - ζ2| s^-(k+1) ds`, the operator
//! `𝒜ζ(s) = (ζ(s/B) - (1-p) ζ(sA/B)) / p` and numerical checks that `𝒜`
//! contracts `d` by at least `ρ = (1 + (1-p)A^k) / (p B^k)`.
//!
//! Functions live on a log-spaced grid. Off-grid values inside the grid come
//! from cubic Hermite interpolation in `s` (slopes from a five-point
//! stencil), which is linear in the data and exact on cubics. Outside the
//! grid a power-law envelope is used: `ζ(s) ≈ ζ(s_min)(s/s_min)^lower` below
//! and `ζ(s_max)(s/s_max)^upper` above.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::EvalGrid;
use crate::rng;

/// Slack allowed on top of `ρ` when checking observed ratios.
pub const RATIO_TOL: f64 = 1e-3;

/// Default operator grid: 512 log-spaced points on `[1e-4, 1e3]`.
pub fn default_grid() -> EvalGrid {
    EvalGrid::log_spaced(1e-4, 1e3, 512).expect("static grid")
}

/// Inputs `(p, a, b)` and every constant derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    /// `(1-p)a + pb`
    pub c: f64,
    /// `a / c`
    #[serde(rename = "A")]
    pub a_ratio: f64,
    /// `b / c`
    #[serde(rename = "B")]
    pub b_ratio: f64,
    /// `(b - a) / (pb + (1-p)a)`
    #[serde(rename = "V")]
    pub v: f64,
    /// `floor(log(1/p) / log V) + 2`
    pub k: u32,
    /// `log(1/p) / log B`
    pub gamma: f64,
    pub rho: f64,
}

/// Computes the derived constants; fails when `V ≤ 1` or `ρ ≥ 1`.
pub fn derive_params(p: f64, a: f64, b: f64) -> Result<ContractionParams> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterDomain(format!("p must lie in (0, 1), got {p}")));
    }
    if !(a > 0.0 && a < b && b < 1.0) {
        return Err(Error::ParameterDomain(format!("need 0 < a < b < 1, got a = {a}, b = {b}")));
    }
    let c = (1.0 - p) * a + p * b;
    let v = (b - a) / (p * b + (1.0 - p) * a);
    if v <= 1.0 {
        return Err(Error::ParameterDomain(format!(
            "V = {v} <= 1 for (p, a, b) = ({p}, {a}, {b}); k is undefined"
        )));
    }
    let log_inv_p = (1.0 / p).ln();
    let kf = (log_inv_p / v.ln()).floor() + 2.0;
    if kf > 1e6 {
        return Err(Error::ParameterDomain(format!("k = {kf} is too large (V = {v})")));
    }
    let k = kf as u32;
    let a_ratio = a / c;
    let b_ratio = b / c;
    let gamma = log_inv_p / b_ratio.ln();
    // Evaluated in logs so huge k does not overflow B^k.
    let kf = f64::from(k);
    let rho = ((1.0 - p) * (kf * a_ratio.ln()).exp()).ln_1p() - p.ln() - kf * b_ratio.ln();
    let rho = rho.exp();
    if rho >= 1.0 {
        return Err(Error::ContractionFailure { p, a, b, rho });
    }
    Ok(ContractionParams {
        p,
        a,
        b,
        c,
        a_ratio,
        b_ratio,
        v,
        k,
        gamma,
        rho,
    })
}

/// Power-law behavior assumed outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// `ζ(s) = O(s^lower)` as `s → 0`.
    pub lower: f64,
    /// `ζ(s) = O(s^upper)` as `s → ∞`.
    pub upper: f64,
}

/// A real function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<EvalGrid>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    envelope: Envelope,
}

/// Derivative weights at `xs[at]` of the Lagrange polynomial through `xs`.
fn lagrange_slope_weights(xs: &[f64], at: usize) -> Vec<f64> {
    let xi = xs[at];
    (0..xs.len())
        .map(|j| {
            if j == at {
                (0..xs.len()).filter(|&m| m != at).map(|m| 1.0 / (xi - xs[m])).sum()
            } else {
                let num: f64 = (0..xs.len())
                    .filter(|&m| m != at && m != j)
                    .map(|m| xi - xs[m])
                    .product();
                let den: f64 = (0..xs.len()).filter(|&m| m != j).map(|m| xs[j] - xs[m]).product();
                num / den
            }
        })
        .collect()
}

fn hermite_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![0.0];
    }
    let width = n.min(5);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let w = lagrange_slope_weights(&x[start..start + width], i - start);
            w.iter().zip(&y[start..start + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

impl GridFunction {
    pub fn new(grid: Arc<EvalGrid>, values: Vec<f64>, envelope: Envelope) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("grid function values must be finite".into()));
        }
        let slopes = hermite_slopes(grid.points(), &values);
        Ok(GridFunction {
            grid,
            values,
            slopes,
            envelope,
        })
    }

    /// Samples `f` at every grid point.
    pub fn sample<F: Fn(f64) -> f64>(grid: Arc<EvalGrid>, envelope: Envelope, f: F) -> Result<Self> {
        let values = grid.points().iter().map(|&s| f(s)).collect();
        GridFunction::new(grid, values, envelope)
    }

    pub fn zero(grid: Arc<EvalGrid>, envelope: Envelope) -> Self {
        let n = grid.len();
        GridFunction::new(grid, vec![0.0; n], envelope).expect("zeros are finite")
    }

    pub fn grid(&self) -> &Arc<EvalGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    /// Value at any `s > 0`.
    pub fn eval(&self, s: f64) -> f64 {
        let x = self.grid.points();
        let n = x.len();
        if s <= x[0] {
            return self.values[0] * (s / x[0]).powf(self.envelope.lower);
        }
        if s >= x[n - 1] {
            return self.values[n - 1] * (s / x[n - 1]).powf(self.envelope.upper);
        }
        let i = x.partition_point(|&g| g <= s) - 1;
        let h = x[i + 1] - x[i];
        let t = (s - x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::Grid("grid functions live on different grids".into()))
        }
    }

    /// `α·self + β·other`, with the weaker of the two envelopes.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        GridFunction::new(self.grid.clone(), values, weaker(self.envelope, other.envelope))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        GridFunction::new(
            self.grid.clone(),
            self.values.iter().map(|v| alpha * v).collect(),
            self.envelope,
        )
        .expect("scaling keeps values finite")
    }
}

fn weaker(x: Envelope, y: Envelope) -> Envelope {
    Envelope {
        lower: x.lower.min(y.lower),
        upper: x.upper.max(y.upper),
    }
}

/// `d(ζ1, ζ2)` with weight `s^-(k+1)`.
///
/// Trapezoid rule in `u = log s` on `|Δ(s)| s^-k`, with Euler–Maclaurin end
/// corrections and analytic tails taken from the envelope exponents.
pub fn metric_d(z1: &GridFunction, z2: &GridFunction, k: u32) -> Result<f64> {
    z1.same_grid(z2)?;
    let env = weaker(z1.envelope, z2.envelope);
    let kf = f64::from(k);
    if env.lower <= kf {
        return Err(Error::Divergence(format!(
            "functions vanish like s^{} at 0; need an exponent above k = {k}",
            env.lower
        )));
    }
    if env.upper >= kf {
        return Err(Error::Divergence(format!(
            "functions grow like s^{} at infinity; need an exponent below k = {k}",
            env.upper
        )));
    }
    let x = z1.grid.points();
    let n = x.len();
    let g: Vec<f64> = (0..n)
        .map(|i| (z1.values[i] - z2.values[i]).abs() * x[i].powf(-kf))
        .collect();
    if n == 1 {
        return Ok(g[0] / (env.lower - kf) + g[0] / (kf - env.upper));
    }
    let u: Vec<f64> = x.iter().map(|s| s.ln()).collect();
    let body: f64 = (0..n - 1).map(|i| 0.5 * (u[i + 1] - u[i]) * (g[i] + g[i + 1])).sum();
    // g(u) ≈ g_0 e^{(lower-k)(u-u_0)} near the left end, likewise on the right.
    let h_lo = u[1] - u[0];
    let h_hi = u[n - 1] - u[n - 2];
    let dg_lo = (env.lower - kf) * g[0];
    let dg_hi = (env.upper - kf) * g[n - 1];
    let end_corr = -(h_hi * h_hi * dg_hi - h_lo * h_lo * dg_lo) / 12.0;
    let tails = g[0] / (env.lower - kf) + g[n - 1] / (kf - env.upper);
    Ok((body + end_corr + tails).max(0.0))
}

/// `𝒜ζ(s) = (ζ(s/B) - (1-p) ζ(sA/B)) / p` on the grid of `ζ`.
pub fn apply_operator(z: &GridFunction, params: &ContractionParams) -> GridFunction {
    let p = params.p;
    let inv_b = 1.0 / params.b_ratio;
    let shrink = params.a_ratio / params.b_ratio;
    let values: Vec<f64> = z
        .grid
        .points()
        .par_iter()
        .map(|&s| (z.eval(s * inv_b) - (1.0 - p) * z.eval(s * shrink)) / p)
        .collect();
    GridFunction::new(z.grid.clone(), values, z.envelope).expect("finite inputs give finite outputs")
}

/// A smooth test function `Σ_m c_m s^(k+1+m) e^(-β_m s)`, `m = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub k: u32,
    pub coeffs: [f64; 3],
    pub decay: [f64; 3],
}

impl TestFunction {
    pub fn random<R: Rng>(k: u32, rng: &mut R) -> Self {
        let mut coeffs = [0.0; 3];
        let mut decay = [0.0; 3];
        for m in 0..3 {
            coeffs[m] = rng.random_range(-1.0..1.0);
            decay[m] = rng.random_range(0.5..2.0);
        }
        TestFunction { k, coeffs, decay }
    }

    pub fn eval(&self, s: f64) -> f64 {
        (0..3)
            .map(|m| self.coeffs[m] * s.powi((self.k + 1 + m as u32) as i32) * (-self.decay[m] * s).exp())
            .sum()
    }

    pub fn on_grid(&self, grid: Arc<EvalGrid>, params: &ContractionParams) -> GridFunction {
        GridFunction::sample(grid, test_envelope(params), |s| self.eval(s)).expect("finite")
    }
}

/// Envelope of functions in the operator's domain: vanishing like
/// `s^(k+1)` at 0 and growing at most like `s^γ` at infinity.
pub fn test_envelope(params: &ContractionParams) -> Envelope {
    Envelope {
        lower: f64::from(params.k) + 1.0,
        upper: params.gamma,
    }
}

/// Outcome of a contraction check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub pairs: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub tolerance: f64,
}

/// Largest `d(𝒜ζ1, 𝒜ζ2) / d(ζ1, ζ2)` over random test-function pairs.
/// Pairs at distance zero count as ratio 0.
pub fn observed_ratios(params: &ContractionParams, n_pairs: usize, seed: u64, grid: &EvalGrid) -> Result<Vec<f64>> {
    if n_pairs == 0 {
        return Err(Error::ParameterDomain("need at least one pair".into()));
    }
    let grid = Arc::new(grid.clone());
    (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, "contraction/pairs", i as u64);
            let z1 = TestFunction::random(params.k, &mut r).on_grid(grid.clone(), params);
            let z2 = TestFunction::random(params.k, &mut r).on_grid(grid.clone(), params);
            pair_ratio(&z1, &z2, params)
        })
        .collect()
}

pub fn pair_ratio(z1: &GridFunction, z2: &GridFunction, params: &ContractionParams) -> Result<f64> {
    let before = metric_d(z1, z2, params.k)?;
    if before == 0.0 {
        return Ok(0.0);
    }
    let after = metric_d(&apply_operator(z1, params), &apply_operator(z2, params), params.k)?;
    Ok(after / before)
}

/// Checks `d(𝒜ζ1, 𝒜ζ2) ≤ (ρ + tol) d(ζ1, ζ2)` on `n_pairs` random pairs over
/// the default grid.
pub fn verify_contraction(params: &ContractionParams, n_pairs: usize, seed: u64) -> Result<ContractionCheck> {
    let ratios = observed_ratios(params, n_pairs, seed, &default_grid())?;
    let max_ratio = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
    if max_ratio > params.rho + RATIO_TOL {
        return Err(Error::ContractionViolation {
            ratio: max_ratio,
            bound: params.rho,
        });
    }
    Ok(ContractionCheck {
        pairs: n_pairs,
        max_ratio,
        bound: params.rho,
        tolerance: RATIO_TOL,
    })
}

/// `d(𝒜^n ζ0, 0)` for `n = 0 ..= n_iter`.
pub fn iterate_to_fixed_point(z0: &GridFunction, params: &ContractionParams, n_iter: usize) -> Result<Vec<f64>> {
    let zero = GridFunction::zero(z0.grid.clone(), z0.envelope);
    let mut z = z0.clone();
    let mut norms = Vec::with_capacity(n_iter + 1);
    norms.push(metric_d(&z, &zero, params.k)?);
    for _ in 0..n_iter {
        z = apply_operator(&z, params);
        norms.push(metric_d(&z, &zero, params.k)?);
    }
    Ok(norms)
}

/// Deterministic random admissible triples `(p, a, b)` with `V > 1`.
pub fn random_triples(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut r = rng::stream(seed, "contraction/sweep", 0);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: f64 = r.random_range(0.02..0.98);
        // V > 1  ⇔  b > a (2-p)/(1-p)
        let a_max = 0.98 * (1.0 - p) / (2.0 - p);
        let a: f64 = r.random_range(0.005..a_max);
        let b_min = a * (2.0 - p) / (1.0 - p);
        let b: f64 = r.random_range(b_min..1.0);
        let v = (b - a) / ((1.0 - p) * a + p * b);
        if v > 1.0 + 1e-9 && b < 1.0 {
            out.push((p, a, b));
        }
    }
    out
}

/// Summary of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub triples: usize,
    pub min_rho: f64,
    pub max_rho: f64,
    pub min_k: u32,
    pub max_k: u32,
    pub params: Vec<ContractionParams>,
}

/// Derives the constants for every triple; the first failure is returned as
/// an error.
pub fn sweep(triples: &[(f64, f64, f64)]) -> Result<SweepSummary> {
    let params = triples
        .iter()
        .map(|&(p, a, b)| derive_params(p, a, b))
        .collect::<Result<Vec<_>>>()?;
    if params.is_empty() {
        return Err(Error::ParameterDomain("empty sweep".into()));
    }
    Ok(SweepSummary {
        triples: params.len(),
        min_rho: params.iter().map(|c| c.rho).fold(f64::INFINITY, f64::min),
        max_rho: params.iter().map(|c| c.rho).fold(f64::NEG_INFINITY, f64::max),
        min_k: params.iter().map(|c| c.k).min().unwrap_or(0),
        max_k: params.iter().map(|c| c.k).max().unwrap_or(0),
        params,
    })
}
