//! Truncated power series and the order-by-order recursions that pin down
//! every Taylor coefficient of a Laplace transform (or its reciprocal) once
//! the first one is fixed.
//!
//! Coefficients are stored as `c_j = g^(j)(0) / j!`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leading coefficients smaller than this make a recursion order degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Default recursion order cap.
pub const DEFAULT_ORDER: usize = 12;

/// Taylor coefficients `c_0 ..= c_K` of a function at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaylorSeries {
    coeffs: Vec<f64>,
}

impl TaylorSeries {
    /// Panics on an empty coefficient vector.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least c_0");
        TaylorSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        TaylorSeries::new(vec![0.0; order + 1])
    }

    /// The constant `1` truncated at `order`.
    pub fn one(order: usize) -> Self {
        TaylorSeries::constant(1.0, order)
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = TaylorSeries::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Expansion of `1 / (1 + λ s)`: `c_j = (-λ)^j`.
    pub fn exponential_lt(mean: f64, order: usize) -> Self {
        TaylorSeries::new((0..=order).map(|j| (-mean).powi(j as i32)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, 0.0);
        TaylorSeries::new(c)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(TaylorSeries::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(TaylorSeries::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let k = self.order();
        let mut out = vec![0.0; k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs[..=k - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(TaylorSeries::new(out))
    }

    /// Multiply every coefficient by `c`.
    pub fn scale(&self, c: f64) -> Self {
        TaylorSeries::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Series of `s ↦ g(α s)`: `c_j ↦ α^j c_j`.
    pub fn scale_arg(&self, alpha: f64) -> Self {
        let mut pow = 1.0;
        TaylorSeries::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let v = c * pow;
                    pow *= alpha;
                    v
                })
                .collect(),
        )
    }

    /// Series of `1 / g`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return Err(Error::SingularSeries);
        }
        let k = self.order();
        let mut r = vec![0.0; k + 1];
        r[0] = 1.0 / c0;
        for n in 1..=k {
            let acc: f64 = (1..=n).map(|j| self.coeffs[j] * r[n - j]).sum();
            r[n] = -acc / c0;
        }
        Ok(TaylorSeries::new(r))
    }

    /// Series of `g'`, one order shorter (order 0 stays order 0 with value 0).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return TaylorSeries::zero(0);
        }
        TaylorSeries::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| j as f64 * c)
                .collect(),
        )
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Coefficient multiplying the unknown `c_k` in the order-`k` term of the
/// geometric compound-sum equation: `q((1-p)^k + p - q^(k-1))`.
pub fn geometric_order_coefficient(p: f64, q: f64, k: usize) -> f64 {
    q * ((1.0 - p).powi(k as i32) + p - q.powi(k as i32 - 1))
}

/// Left side minus right side of
/// `f((1-p)s)((1-p) + p f(s))(1 - (1-q) f(qs)) - q f(qs)`, as a series.
pub fn geometric_equation_series(f: &TaylorSeries, p: f64, q: f64) -> Result<TaylorSeries> {
    let k = f.order();
    let fq = f.scale_arg(q);
    let mixed = TaylorSeries::constant(1.0 - p, k).add(&f.scale(p))?;
    let tail = TaylorSeries::one(k).sub(&fq.scale(1.0 - q))?;
    f.scale_arg(1.0 - p).mul(&mixed)?.mul(&tail)?.sub(&fq.scale(q))
}

/// Solves the geometric compound-sum equation order by order for the Laplace
/// transform series with `c_0 = 1`, `c_1 = -λ`.
pub fn solve_geometric_recursion(p: f64, q: f64, mean: f64, order: usize) -> Result<TaylorSeries> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::ParameterDomain(format!("mean must be positive, got {mean}")));
    }
    let mut c = vec![0.0; order + 1];
    c[0] = 1.0;
    if order >= 1 {
        c[1] = -mean;
    }
    for k in 2..=order {
        let lead = geometric_order_coefficient(p, q, k);
        if lead.abs() < DEGENERATE_TOL {
            return Err(Error::NonUnique {
                order: k,
                coefficient: lead,
            });
        }
        // With c_k = 0 (and all higher zero), the order-k residual is the
        // part not involving c_k.
        let trial = TaylorSeries::new(c[..=k].to_vec());
        let rest = geometric_equation_series(&trial, p, q)?.coeffs[k];
        c[k] = -rest / lead;
    }
    Ok(TaylorSeries::new(c))
}

/// `φ'((1-p)t)(p + (1-p)φ(t)) - λ φ((1-p)t)` as a series (one order shorter
/// than `phi`).
pub fn regression_equation_series(phi: &TaylorSeries, p: f64, mean: f64) -> Result<TaylorSeries> {
    let k = phi.order();
    if k == 0 {
        return Ok(TaylorSeries::zero(0));
    }
    let m = k - 1;
    let dphi = phi.derivative().scale_arg(1.0 - p);
    let inner = TaylorSeries::constant(p, m).add(&phi.truncate(m).scale(1.0 - p))?;
    dphi.mul(&inner)?
        .sub(&phi.truncate(m).scale_arg(1.0 - p).scale(mean))
}

/// Solves the regression-constancy equation for `φ = 1/f` with `φ(0) = 1`,
/// `φ'(0) = λ`. The order-`m` unknown enters with coefficient
/// `m (1-p)^(m-1)`, which never vanishes for `p ∈ (0, 1)`.
pub fn solve_regression_recursion(p: f64, mean: f64, order: usize) -> Result<TaylorSeries> {
    check_unit("p", p)?;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::ParameterDomain(format!("mean must be positive, got {mean}")));
    }
    let mut d = vec![0.0; order + 1];
    d[0] = 1.0;
    if order >= 1 {
        d[1] = mean;
    }
    for m in 2..=order {
        let lead = m as f64 * (1.0 - p).powi(m as i32 - 1);
        let trial = TaylorSeries::new(d[..=m].to_vec());
        let rest = regression_equation_series(&trial, p, mean)?.coeffs[m - 1];
        d[m] = -rest / lead;
    }
    Ok(TaylorSeries::new(d))
}

/// `p B^j + (1-p) A^j - 1` for `j = 0 ..= max_j`, with `A = a/c`, `B = b/c`,
/// `c = (1-p)a + pb`. Exactly zero at `j = 0, 1`.
pub fn verify_neq_condition(p: f64, a: f64, b: f64, max_j: usize) -> Result<Vec<(usize, f64)>> {
    check_unit("p", p)?;
    if !(a > 0.0 && a < b && b < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "need 0 < a < b < 1, got a = {a}, b = {b}"
        )));
    }
    let c = (1.0 - p) * a + p * b;
    Ok((0..=max_j)
        .map(|j| {
            let v = match j {
                0 => 0.0,
                1 => (p * b + (1.0 - p) * a) / c - 1.0,
                _ => {
                    let j = j as i32;
                    p * (b / c).powi(j) + (1.0 - p) * (a / c).powi(j) - 1.0
                }
            };
            (j, v)
        })
        .collect())
}
