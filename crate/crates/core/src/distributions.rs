//! Positive-support distribution families: sampling, Laplace transforms,
//! their derivatives and raw moments.
//!
//! `Exponential { mean }` is parameterized by its mean `λ`, so its Laplace
//! transform is `1 / (1 + λ s)`. Weibull with shape other than 1 and the
//! log-normal have no elementary transform; those are integrated numerically.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Exp, Gamma, LogNormal, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::series::TaylorSeries;

/// Absolute tolerance for transforms evaluated by quadrature.
pub const LT_QUAD_TOL: f64 = 1e-12;

/// A positive-support distribution family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    /// Exponential law with mean `mean` (λ = E X).
    Exponential { mean: f64 },
    /// Gamma law, shape/rate parameterization.
    Gamma { shape: f64, rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// `exp(N(mu, sigma²))`.
    LogNormal { mu: f64, sigma: f64 },
    /// Uniform on (0, 1).
    Uniform01,
    /// `x1` with probability `w`, otherwise `x2`.
    TwoPoint { x1: f64, x2: f64, w: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be nonnegative and finite, got {v}")))
    }
}

impl DistSpec {
    pub fn exponential(mean: f64) -> Result<Self> {
        DistSpec::Exponential { mean }.validated()
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        DistSpec::Gamma { shape, rate }.validated()
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        DistSpec::Weibull { shape, scale }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        DistSpec::LogNormal { mu, sigma }.validated()
    }

    pub fn two_point(x1: f64, x2: f64, w: f64) -> Result<Self> {
        DistSpec::TwoPoint { x1, x2, w }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Exponential { mean } => positive("mean", mean),
            DistSpec::Gamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)
            }
            DistSpec::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            DistSpec::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::ParameterDomain(format!("mu must be finite, got {mu}")));
                }
                positive("sigma", sigma)
            }
            DistSpec::Uniform01 => Ok(()),
            DistSpec::TwoPoint { x1, x2, w } => {
                positive("x1", x1)?;
                positive("x2", x2)?;
                if w.is_finite() && w > 0.0 && w < 1.0 {
                    Ok(())
                } else {
                    Err(Error::ParameterDomain(format!("w must lie in (0, 1), got {w}")))
                }
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DistSpec::Exponential { .. } => "exponential",
            DistSpec::Gamma { .. } => "gamma",
            DistSpec::Weibull { .. } => "weibull",
            DistSpec::LogNormal { .. } => "lognormal",
            DistSpec::Uniform01 => "uniform01",
            DistSpec::TwoPoint { .. } => "two_point",
        }
    }

    /// Short human-readable label, e.g. `gamma(shape=2,rate=1)`.
    pub fn label(&self) -> String {
        let params = self
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        format!("{}({params})", self.family_name())
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            DistSpec::Exponential { mean } => vec![("mean", mean)],
            DistSpec::Gamma { shape, rate } => vec![("shape", shape), ("rate", rate)],
            DistSpec::Weibull { shape, scale } => vec![("shape", shape), ("scale", scale)],
            DistSpec::LogNormal { mu, sigma } => vec![("mu", mu), ("sigma", sigma)],
            DistSpec::Uniform01 => vec![],
            DistSpec::TwoPoint { x1, x2, w } => vec![("x1", x1), ("x2", x2), ("w", w)],
        }
    }

    /// True when the law is exponential, whatever family it is written in.
    pub fn is_exponential(&self) -> bool {
        match *self {
            DistSpec::Exponential { .. } => true,
            DistSpec::Gamma { shape, .. } => shape == 1.0,
            DistSpec::Weibull { shape, .. } => shape == 1.0,
            _ => false,
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// Raw moment `E X^j`.
    pub fn moment(&self, j: usize) -> Result<f64> {
        self.validate()?;
        let jf = j as f64;
        let m = match *self {
            DistSpec::Exponential { mean } => (1..=j).map(|i| i as f64 * mean).product(),
            DistSpec::Gamma { shape, rate } => (0..j).map(|i| (shape + i as f64) / rate).product(),
            DistSpec::Weibull { shape, scale } => {
                scale.powi(j as i32) * (ln_gamma(1.0 + jf / shape)).exp()
            }
            DistSpec::LogNormal { mu, sigma } => (jf * mu + 0.5 * jf * jf * sigma * sigma).exp(),
            DistSpec::Uniform01 => 1.0 / (jf + 1.0),
            DistSpec::TwoPoint { x1, x2, w } => {
                w * x1.powi(j as i32) + (1.0 - w) * x2.powi(j as i32)
            }
        };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::MomentDomain {
                family: self.label(),
                order: j,
            })
        }
    }

    /// `E X^j / j!`, computed without forming the factorial.
    fn scaled_moment(&self, j: usize) -> Result<f64> {
        let jf = j as f64;
        let v = match *self {
            DistSpec::Exponential { mean } => mean.powi(j as i32),
            DistSpec::Gamma { shape, rate } => (0..j)
                .map(|i| (shape + i as f64) / (rate * (i as f64 + 1.0)))
                .product(),
            DistSpec::Weibull { shape, scale } => {
                scale.powi(j as i32) * (ln_gamma(1.0 + jf / shape) - ln_gamma(1.0 + jf)).exp()
            }
            DistSpec::LogNormal { mu, sigma } => {
                (jf * mu + 0.5 * jf * jf * sigma * sigma - ln_gamma(1.0 + jf)).exp()
            }
            DistSpec::Uniform01 => (-ln_gamma(2.0 + jf)).exp(),
            DistSpec::TwoPoint { x1, x2, w } => {
                (w * x1.powi(j as i32) + (1.0 - w) * x2.powi(j as i32))
                    * (-ln_gamma(1.0 + jf)).exp()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MomentDomain {
                family: self.label(),
                order: j,
            })
        }
    }

    /// Taylor coefficients of the Laplace transform at 0:
    /// `c_j = (-1)^j E X^j / j!`, `j = 0..=order`.
    pub fn lt_taylor(&self, order: usize) -> Result<TaylorSeries> {
        self.validate()?;
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(1.0);
        for j in 1..=order {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs.push(sign * self.scaled_moment(j)?);
        }
        Ok(TaylorSeries::new(coeffs))
    }

    /// Laplace transform `E exp(-s X)`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        self.validate()?;
        nonneg("s", s)?;
        if s == 0.0 {
            return Ok(1.0);
        }
        match *self {
            DistSpec::Exponential { mean } => Ok(1.0 / (1.0 + mean * s)),
            DistSpec::Gamma { shape, rate } => Ok((1.0 + s / rate).powf(-shape)),
            DistSpec::Weibull { shape: 1.0, scale } => Ok(1.0 / (1.0 + scale * s)),
            DistSpec::Weibull { shape, scale } => weibull_integral(shape, scale, s, 0),
            DistSpec::LogNormal { mu, sigma } => lognormal_integral(mu, sigma, s, 0),
            DistSpec::Uniform01 => Ok(-(-s).exp_m1() / s),
            DistSpec::TwoPoint { x1, x2, w } => Ok(w * (-s * x1).exp() + (1.0 - w) * (-s * x2).exp()),
        }
    }

    /// Derivative of the Laplace transform, `-E[X exp(-s X)]`.
    pub fn laplace_deriv(&self, s: f64) -> Result<f64> {
        self.validate()?;
        nonneg("s", s)?;
        if s == 0.0 {
            return Ok(-self.mean()?);
        }
        match *self {
            DistSpec::Exponential { mean } => Ok(-mean / (1.0 + mean * s).powi(2)),
            DistSpec::Gamma { shape, rate } => Ok(-(shape / rate) * (1.0 + s / rate).powf(-shape - 1.0)),
            DistSpec::Weibull { shape: 1.0, scale } => Ok(-scale / (1.0 + scale * s).powi(2)),
            DistSpec::Weibull { shape, scale } => weibull_integral(shape, scale, s, 1).map(|v| -v),
            DistSpec::LogNormal { mu, sigma } => lognormal_integral(mu, sigma, s, 1).map(|v| -v),
            DistSpec::Uniform01 => Ok(uniform_lt_deriv(s)),
            DistSpec::TwoPoint { x1, x2, w } => {
                Ok(-(w * x1 * (-s * x1).exp() + (1.0 - w) * x2 * (-s * x2).exp()))
            }
        }
    }

    /// Prepared sampler for this family.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let bad = |e: &dyn std::fmt::Display| Error::ParameterDomain(e.to_string());
        Ok(match *self {
            DistSpec::Exponential { mean } => Sampler::Exp(Exp::new(1.0 / mean).map_err(|e| bad(&e))?),
            DistSpec::Gamma { shape, rate } => {
                Sampler::Gamma(Gamma::new(shape, 1.0 / rate).map_err(|e| bad(&e))?)
            }
            DistSpec::Weibull { shape, scale } => {
                Sampler::Weibull(Weibull::new(scale, shape).map_err(|e| bad(&e))?)
            }
            DistSpec::LogNormal { mu, sigma } => {
                Sampler::LogNormal(LogNormal::new(mu, sigma).map_err(|e| bad(&e))?)
            }
            DistSpec::Uniform01 => Sampler::Uniform01,
            DistSpec::TwoPoint { x1, x2, w } => Sampler::TwoPoint { x1, x2, w },
        })
    }

    /// `n` i.i.d. draws; identical `(spec, n, seed)` give identical values.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        self.sample_stream(n, seed, "sample")
    }

    pub(crate) fn sample_stream(&self, n: usize, seed: u64, label: &str) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::ParameterDomain("sample size must be at least 1".into()));
        }
        let sampler = self.sampler()?;
        let values = rng::chunked(n, seed, label, |r, len, out| {
            out.extend((0..len).map(|_| sampler.draw(r)))
        });
        Ok(SampleBatch {
            values,
            spec: *self,
            seed,
            stream: label.to_string(),
        })
    }
}

/// `∫ x^power exp(-s x) dF(x)` for the Weibull law, as an integral over
/// `y = log W`, `W ~ Exp(1)`, `X = scale W^(1/shape)`.
fn weibull_integral(shape: f64, scale: f64, s: f64, power: i32) -> Result<f64> {
    let integrand = |y: f64| {
        let x = scale * (y / shape).exp();
        x.powi(power) * (-s * x - y.exp() + y).exp()
    };
    quad::integrate(integrand, -80.0, 5.0, LT_QUAD_TOL)
}

/// `∫ x^power exp(-s x) dF(x)` for the log-normal law over the standard
/// normal variable `z`.
fn lognormal_integral(mu: f64, sigma: f64, s: f64, power: i32) -> Result<f64> {
    let norm = 1.0 / (2.0 * PI).sqrt();
    let integrand = |z: f64| {
        let x = (mu + sigma * z).exp();
        x.powi(power) * norm * (-s * x - 0.5 * z * z).exp()
    };
    let hi = 13.0 + f64::from(power) * sigma;
    quad::integrate(integrand, -13.0, hi, LT_QUAD_TOL)
}

fn uniform_lt_deriv(s: f64) -> f64 {
    if s < 0.5 {
        // f'(s) = -sum_{j>=1} j (-s)^(j-1) / (j+1)!
        let mut term = 1.0;
        let mut acc = 0.0;
        let mut fact = 2.0;
        for j in 1..30 {
            let jf = j as f64;
            acc -= jf * term / fact;
            term *= -s;
            fact *= jf + 2.0;
        }
        acc
    } else {
        ((-s).exp() * (1.0 + s) - 1.0) / (s * s)
    }
}

/// Ready-to-draw form of a [`DistSpec`].
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Weibull(Weibull<f64>),
    LogNormal(LogNormal<f64>),
    Uniform01,
    TwoPoint { x1: f64, x2: f64, w: f64 },
}

impl Sampler {
    /// One strictly positive draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = match self {
                Sampler::Exp(d) => d.sample(rng),
                Sampler::Gamma(d) => d.sample(rng),
                Sampler::Weibull(d) => d.sample(rng),
                Sampler::LogNormal(d) => d.sample(rng),
                Sampler::Uniform01 => Open01.sample(rng),
                Sampler::TwoPoint { x1, x2, w } => {
                    if rng.random::<f64>() < *w {
                        *x1
                    } else {
                        *x2
                    }
                }
            };
            // Underflow to zero is possible for some families; redraw.
            if x > 0.0 {
                return x;
            }
        }
    }
}

/// A batch of draws together with what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub spec: DistSpec,
    pub seed: u64,
    /// Stream label the values were drawn from (`sample`, `mixed`, ...).
    pub stream: String,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        rng::ordered_sum(&self.values, |x| x) / self.n() as f64
    }

    /// Single-column CSV with `#` metadata lines before the header.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# spec: {}", serde_json::to_string(&self.spec)?)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# stream: {}", self.stream)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["value"])?;
        for v in &self.values {
            out.write_record([crate::num(*v)])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistSpecRepr {
    family: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

impl Serialize for DistSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistSpecRepr {
            family: self.family_name().to_string(),
            params: self.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DistSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DistSpecRepr::deserialize(d)?;
        DistSpec::from_parts(&repr.family, &repr.params).map_err(D::Error::custom)
    }
}

impl DistSpec {
    /// Parses `{"family": ..., "params": {...}}`. Malformed JSON is a
    /// config error; bad parameter values keep their own error kind.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: DistSpecRepr = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_parts(&repr.family, &repr.params)
    }

    fn from_parts(family: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match family {
            "exponential" => &["mean", "rate"],
            "gamma" => &["shape", "rate"],
            "weibull" => &["shape", "scale"],
            "lognormal" => &["mu", "sigma"],
            "uniform01" => &[],
            "two_point" => &["x1", "x2", "w"],
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown parameter `{k}` for family `{family}`")));
        }
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| Error::Config(format!("family `{family}` needs parameter `{k}`")))
        };
        let spec = match family {
            "exponential" => match (params.get("mean"), params.get("rate")) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config("give exactly one of `mean` or `rate`".into()))
                }
                (None, Some(&rate)) => {
                    positive("rate", rate)?;
                    DistSpec::Exponential { mean: 1.0 / rate }
                }
                _ => DistSpec::Exponential { mean: get("mean")? },
            },
            "gamma" => DistSpec::Gamma {
                shape: get("shape")?,
                rate: get("rate")?,
            },
            "weibull" => DistSpec::Weibull {
                shape: get("shape")?,
                scale: get("scale")?,
            },
            "lognormal" => DistSpec::LogNormal {
                mu: get("mu")?,
                sigma: get("sigma")?,
            },
            "uniform01" => DistSpec::Uniform01,
            _ => DistSpec::TwoPoint {
                x1: get("x1")?,
                x2: get("x2")?,
                w: get("w")?,
            },
        };
        spec.validated()
    }
}
