//! Simulation of the random-coefficient linear forms.
//!
//! `ε_p` is a Bernoulli switch equal to 1 with probability `p`. Forms that
//! are compared in distribution are drawn from disjoint derived streams;
//! forms whose joint law matters share one draw of `(X, Y, ε_p)` per row.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::distributions::{DistSpec, SampleBatch};
use crate::error::{Error, Result};
use crate::rng;

/// Scalar parameters of the forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
}

impl Default for FormParams {
    fn default() -> Self {
        FormParams {
            p: 0.5,
            a: 0.2,
            b: 0.8,
            q: 0.3,
        }
    }
}

impl FormParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("p", self.p)?;
        check_unit("q", self.q)?;
        check_pos("a", self.a)?;
        check_pos("b", self.b)
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ParameterDomain("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Whether row `i` of `left` and `right` came from the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Coupled,
    IndependentStreams,
}

/// Two equally long columns of realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub coupling: Coupling,
    pub spec: DistSpec,
    pub seed: u64,
}

impl PairedSample {
    pub fn new(left: Vec<f64>, right: Vec<f64>, coupling: Coupling, spec: DistSpec, seed: u64) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::ParameterDomain(format!(
                "paired columns differ in length ({} vs {})",
                left.len(),
                right.len()
            )));
        }
        Ok(PairedSample {
            left,
            right,
            coupling,
            spec,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.left.len()
    }

    /// Both columns multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        PairedSample {
            left: self.left.iter().map(|x| x * t).collect(),
            right: self.right.iter().map(|x| x * t).collect(),
            ..self.clone()
        }
    }

    /// Two-column CSV with `#` metadata lines before the header.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# spec: {}", serde_json::to_string(&self.spec)?)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# coupling: {}", serde_json::to_string(&self.coupling)?.trim_matches('"'))?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["left", "right"])?;
        for (l, r) in self.left.iter().zip(&self.right) {
            out.write_record([crate::num(*l), crate::num(*r)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// One row of underlying draws.
#[derive(Debug, Clone, Copy)]
struct Draw {
    x: f64,
    y: f64,
    eps: bool,
}

fn draws(spec: &DistSpec, p: f64, n: usize, seed: u64, label: &str) -> Result<Vec<Draw>> {
    check_n(n)?;
    let sampler = spec.sampler()?;
    Ok(rng::chunked(n, seed, label, |r, len, out| {
        for _ in 0..len {
            let x = sampler.draw(r);
            let y = sampler.draw(r);
            let eps = r.random::<f64>() < p;
            out.push(Draw { x, y, eps });
        }
    }))
}

const COUPLED: &str = "forms/coupled";

/// Rows `(L1, L2) = ((1-p)aX + ε_p aY, pbX + (1-ε_p)bY)` from one draw each.
#[allow(non_snake_case)]
pub fn simulate_L1L2(spec: &DistSpec, p: f64, a: f64, b: f64, n: usize, seed: u64) -> Result<PairedSample> {
    check_unit("p", p)?;
    check_pos("a", a)?;
    check_pos("b", b)?;
    let d = draws(spec, p, n, seed, COUPLED)?;
    let e = |on: bool| if on { 1.0 } else { 0.0 };
    let left = d.iter().map(|r| a * ((1.0 - p) * r.x + e(r.eps) * r.y)).collect();
    let right = d.iter().map(|r| b * (p * r.x + e(!r.eps) * r.y)).collect();
    PairedSample::new(left, right, Coupling::Coupled, *spec, seed)
}

/// Rows `((1-p)X + ε_p Y, pX + (1-ε_p)Y)`; each row sums to `X + Y`.
pub fn simulate_pair_transform(spec: &DistSpec, p: f64, n: usize, seed: u64) -> Result<PairedSample> {
    simulate_L1L2(spec, p, 1.0, 1.0, n, seed)
}

/// Draws of `(1-p)X + ε_p Y`.
pub fn simulate_mixed(spec: &DistSpec, p: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    check_unit("p", p)?;
    let label = "forms/mixed";
    let values = draws(spec, p, n, seed, label)?
        .iter()
        .map(|r| (1.0 - p) * r.x + if r.eps { r.y } else { 0.0 })
        .collect();
    Ok(SampleBatch {
        values,
        spec: *spec,
        seed,
        stream: format!("{label}(p={p})"),
    })
}

/// `aX + bY` (left) against `((1-p)a + pb)X + (aε_p + b(1-ε_p))Y` (right),
/// drawn from disjoint streams.
pub fn simulate_ab_forms(spec: &DistSpec, p: f64, a: f64, b: f64, n: usize, seed: u64) -> Result<PairedSample> {
    check_unit("p", p)?;
    check_pos("a", a)?;
    if !(b > a && b.is_finite()) {
        return Err(Error::ParameterDomain(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let c = (1.0 - p) * a + p * b;
    let left = draws(spec, p, n, seed, "forms/ab-left")?
        .iter()
        .map(|r| a * r.x + b * r.y)
        .collect();
    let right = draws(spec, p, n, seed, "forms/ab-right")?
        .iter()
        .map(|r| c * r.x + if r.eps { a } else { b } * r.y)
        .collect();
    PairedSample::new(left, right, Coupling::IndependentStreams, *spec, seed)
}

/// Compound sums `q Σ_{j=1}^{ν} X_j` with their summand counts `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundSample {
    pub batch: SampleBatch,
    pub counts: Vec<u64>,
}

/// `ν` is geometric on `{1, 2, ...}`: `P(ν = m) = q (1-q)^(m-1)`.
pub fn simulate_geometric_sum_counts(spec: &DistSpec, q: f64, n: usize, seed: u64) -> Result<CompoundSample> {
    check_unit("q", q)?;
    check_n(n)?;
    let sampler = spec.sampler()?;
    let geom = Geometric::new(q).map_err(|e| Error::ParameterDomain(e.to_string()))?;
    let label = "forms/geometric-sum";
    let rows: Vec<(f64, u64)> = rng::chunked(n, seed, label, |r, len, out| {
        for _ in 0..len {
            // rand_distr counts failures before the first success.
            let nu = geom.sample(r) + 1;
            let sum: f64 = (0..nu).map(|_| sampler.draw(r)).sum();
            out.push((q * sum, nu));
        }
    });
    let (values, counts) = rows.into_iter().unzip();
    Ok(CompoundSample {
        batch: SampleBatch {
            values,
            spec: *spec,
            seed,
            stream: format!("{label}(q={q})"),
        },
        counts,
    })
}

pub fn simulate_geometric_sum(spec: &DistSpec, q: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    simulate_geometric_sum_counts(spec, q, n, seed).map(|c| c.batch)
}
