//! Laplace-transform functions and residuals of the characterization
//! equations.
//!
//! Every residual is "left side minus right side", with the sides taken in
//! the order the equation is usually written. For `f(s) = 1/(1 + λs)` all of
//! them vanish identically.

use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::distributions::{DistSpec, SampleBatch};
use crate::error::{Error, Result};
use crate::rng;

/// Absolute level below which a residual counts as an analytic zero.
pub const ANALYTIC_ZERO_TOL: f64 = 1e-12;

/// Where a transform's values come from.
#[derive(Debug, Clone)]
pub enum LtSource {
    Analytic(DistSpec),
    Empirical(Arc<SampleBatch>),
}

/// A Laplace transform `f` together with its derivative.
#[derive(Debug, Clone)]
pub struct LtFunction {
    source: LtSource,
}

impl LtFunction {
    pub fn analytic(spec: DistSpec) -> Result<Self> {
        spec.validate()?;
        Ok(LtFunction {
            source: LtSource::Analytic(spec),
        })
    }

    /// `f(s) = mean of exp(-s x_i)` over the batch.
    pub fn empirical(batch: SampleBatch) -> Result<Self> {
        if batch.values.is_empty() {
            return Err(Error::DegenerateSample("empty batch".into()));
        }
        Ok(LtFunction {
            source: LtSource::Empirical(Arc::new(batch)),
        })
    }

    pub fn source(&self) -> &LtSource {
        &self.source
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        match &self.source {
            LtSource::Analytic(spec) => spec.laplace(s),
            LtSource::Empirical(b) => {
                check_arg(s)?;
                Ok(rng::ordered_sum(&b.values, |x| (-s * x).exp()) / b.n() as f64)
            }
        }
    }

    pub fn deriv(&self, s: f64) -> Result<f64> {
        match &self.source {
            LtSource::Analytic(spec) => spec.laplace_deriv(s),
            LtSource::Empirical(b) => {
                check_arg(s)?;
                Ok(-rng::ordered_sum(&b.values, |x| x * (-s * x).exp()) / b.n() as f64)
            }
        }
    }

    /// `E X`, either exact or the sample mean.
    pub fn mean(&self) -> Result<f64> {
        self.deriv(0.0).map(|d| -d)
    }
}

fn check_arg(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("transform argument must be >= 0, got {s}")))
    }
}

fn check_p(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must lie in (0, 1), got {p}")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")))
    }
}

/// Joint transform of `(L1, L2)` minus the product of the marginals:
/// `f(a(1-p)s + bpt)(p f(as) + (1-p) f(bt))
///  - f(a(1-p)s)(p f(as) + 1-p) · f(bpt)(p + (1-p) f(bt))`.
pub fn residual_independence(f: &LtFunction, p: f64, a: f64, b: f64, s: f64, t: f64) -> Result<f64> {
    check_p("p", p)?;
    check_pos("a", a)?;
    check_pos("b", b)?;
    check_arg(s)?;
    check_arg(t)?;
    // Only `as` and `bt` enter, so rescaling (a, b) into (s, t) is exact.
    let (u, v) = (a * s, b * t);
    let fas = f.eval(u)?;
    let fbt = f.eval(v)?;
    let joint = f.eval((1.0 - p) * u + p * v)? * (fas * p + fbt * (1.0 - p));
    let left = f.eval((1.0 - p) * u)? * (fas * p + (1.0 - p));
    let right = f.eval(p * v)? * (p + fbt * (1.0 - p));
    Ok(joint - left * right)
}

/// Diagonal `s = t` of the independence equation (after rescaling):
/// `f²(s) - f(ps) f((1-p)s)(p(1-p) f²(s) + (p² + (1-p)²) f(s) + p(1-p))`.
pub fn residual_diagonal(f: &LtFunction, p: f64, s: f64) -> Result<f64> {
    check_p("p", p)?;
    check_arg(s)?;
    let fs = f.eval(s)?;
    let pq = p * (1.0 - p);
    let quad = pq * fs * fs + (p * p + (1.0 - p) * (1.0 - p)) * fs + pq;
    Ok(fs * fs - f.eval(p * s)? * f.eval((1.0 - p) * s)? * quad)
}

/// `f(t) - f((1-p)t)(p f(t) + 1 - p)`: transform form of `X ≗ (1-p)X + ε_p Y`.
pub fn residual_fixedpoint(f: &LtFunction, p: f64, t: f64) -> Result<f64> {
    check_p("p", p)?;
    check_arg(t)?;
    let ft = f.eval(t)?;
    Ok(ft - f.eval((1.0 - p) * t)? * (p * ft + (1.0 - p)))
}

/// `f(as) f(bs) - f(cs)(p f(as) + (1-p) f(bs))` with `c = (1-p)a + pb`.
pub fn residual_abforms(f: &LtFunction, p: f64, a: f64, b: f64, s: f64) -> Result<f64> {
    check_p("p", p)?;
    check_pos("a", a)?;
    if b <= a || !b.is_finite() {
        return Err(Error::ParameterDomain(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    check_arg(s)?;
    let c = (1.0 - p) * a + p * b;
    let fa = f.eval(a * s)?;
    let fb = f.eval(b * s)?;
    Ok(fa * fb - f.eval(c * s)? * (p * fa + (1.0 - p) * fb))
}

/// `f((1-p)s)((1-p) + p f(s))(1 - (1-q) f(qs)) - q f(qs)`.
pub fn residual_geometric(f: &LtFunction, p: f64, q: f64, s: f64) -> Result<f64> {
    check_p("p", p)?;
    check_p("q", q)?;
    check_arg(s)?;
    let fqs = f.eval(q * s)?;
    let lhs = f.eval((1.0 - p) * s)? * ((1.0 - p) + p * f.eval(s)?) * (1.0 - (1.0 - q) * fqs);
    Ok(lhs - q * fqs)
}

/// `-p f'((1-p)t)(p f(t) + 1 - p) - λ p f((1-p)t) f(t)`, `λ = E X`.
pub fn residual_regression(f: &LtFunction, p: f64, mean: f64, t: f64) -> Result<f64> {
    check_p("p", p)?;
    check_pos("mean", mean)?;
    check_arg(t)?;
    let ft = f.eval(t)?;
    let u = (1.0 - p) * t;
    let lhs = -p * f.deriv(u)? * (p * ft + (1.0 - p));
    Ok(lhs - mean * p * f.eval(u)? * ft)
}

/// Difference of `f((1-p)t)(1 - p + p f(t))` between `p1` and `p2`.
pub fn residual_p_invariance(f: &LtFunction, p1: f64, p2: f64, t: f64) -> Result<f64> {
    check_p("p1", p1)?;
    check_p("p2", p2)?;
    if p1 == p2 {
        return Err(Error::ParameterDomain("p1 and p2 must differ".into()));
    }
    check_arg(t)?;
    let ft = f.eval(t)?;
    let side = |p: f64| -> Result<f64> { Ok(f.eval((1.0 - p) * t)? * (1.0 - p + p * ft)) };
    Ok(side(p1)? - side(p2)?)
}

/// One characterization equation with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case", deny_unknown_fields)]
pub enum Equation {
    Independence { p: f64, a: f64, b: f64 },
    Diagonal { p: f64 },
    FixedPoint { p: f64 },
    AbForms { p: f64, a: f64, b: f64 },
    Geometric { p: f64, q: f64 },
    Regression { p: f64, mean: f64 },
    PInvariance { p1: f64, p2: f64 },
}

impl Equation {
    pub fn tag(&self) -> &'static str {
        match self {
            Equation::Independence { .. } => "independence",
            Equation::Diagonal { .. } => "diagonal",
            Equation::FixedPoint { .. } => "fixed_point",
            Equation::AbForms { .. } => "ab_forms",
            Equation::Geometric { .. } => "geometric",
            Equation::Regression { .. } => "regression",
            Equation::PInvariance { .. } => "p_invariance",
        }
    }

    /// Whether the residual takes a second argument `t`.
    pub fn is_bivariate(&self) -> bool {
        matches!(self, Equation::Independence { .. })
    }

    /// Residual at `s` (and `t` for bivariate equations; ignored otherwise).
    pub fn residual(&self, f: &LtFunction, s: f64, t: f64) -> Result<f64> {
        match *self {
            Equation::Independence { p, a, b } => residual_independence(f, p, a, b, s, t),
            Equation::Diagonal { p } => residual_diagonal(f, p, s),
            Equation::FixedPoint { p } => residual_fixedpoint(f, p, s),
            Equation::AbForms { p, a, b } => residual_abforms(f, p, a, b, s),
            Equation::Geometric { p, q } => residual_geometric(f, p, q, s),
            Equation::Regression { p, mean } => residual_regression(f, p, mean, s),
            Equation::PInvariance { p1, p2 } => residual_p_invariance(f, p1, p2, s),
        }
    }
}

/// Strictly increasing, positive, finite evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EvalGrid {
    points: Vec<f64>,
}

impl EvalGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Grid("grid has no points".into()));
        }
        if points.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Grid("grid points must be positive and finite".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("grid points must be strictly increasing".into()));
        }
        Ok(EvalGrid { points })
    }

    /// `n` points spaced evenly in `log s` on `[lo, hi]`, endpoints exact.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || n == 0 {
            return Err(Error::Grid(format!("bad log grid [{lo}, {hi}] with {n} points")));
        }
        if n == 1 {
            return EvalGrid::new(vec![lo]);
        }
        let (l0, l1) = (lo.ln(), hi.ln());
        let step = (l1 - l0) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| (l0 + step * i as f64).exp()).collect();
        pts[0] = lo;
        pts[n - 1] = hi;
        EvalGrid::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for EvalGrid {
    /// 50 log-spaced points on `[0.01, 10]`.
    fn default() -> Self {
        EvalGrid::log_spaced(0.01, 10.0, 50).expect("static grid")
    }
}

impl TryFrom<Vec<f64>> for EvalGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        EvalGrid::new(v)
    }
}

impl From<EvalGrid> for Vec<f64> {
    fn from(g: EvalGrid) -> Self {
        g.points
    }
}

/// A residual evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub s: f64,
    pub t: Option<f64>,
    pub value: f64,
}

/// Residuals of one equation over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub equation: Equation,
    pub points: Vec<ResidualPoint>,
    pub max_abs: f64,
    pub rms: f64,
}

impl ResidualReport {
    pub fn from_points(equation: Equation, points: Vec<ResidualPoint>) -> Self {
        let max_abs = points.iter().fold(0.0f64, |m, p| m.max(p.value.abs()));
        let rms = if points.is_empty() {
            0.0
        } else {
            (points.iter().map(|p| p.value * p.value).sum::<f64>() / points.len() as f64).sqrt()
        };
        ResidualReport {
            equation,
            points,
            max_abs,
            rms,
        }
    }

    pub fn is_analytic_zero(&self) -> bool {
        self.max_abs < ANALYTIC_ZERO_TOL
    }

    /// CSV with columns `s,t,residual`; `t` is empty for univariate equations.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# equation: {}", serde_json::to_string(&self.equation)?)?;
        writeln!(w, "# max_abs: {}", crate::num(self.max_abs))?;
        writeln!(w, "# rms: {}", crate::num(self.rms))?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "t", "residual"])?;
        for p in &self.points {
            out.write_record([
                crate::num(p.s),
                p.t.map(crate::num).unwrap_or_default(),
                crate::num(p.value),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl Serialize for ResidualReport {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let pts: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| match p.t {
                Some(t) => vec![p.s, t, p.value],
                None => vec![p.s, p.value],
            })
            .collect();
        let mut st = ser.serialize_struct("ResidualReport", 5)?;
        st.serialize_field("equation", self.equation.tag())?;
        st.serialize_field("params", &self.equation)?;
        st.serialize_field("max_abs", &self.max_abs)?;
        st.serialize_field("rms", &self.rms)?;
        st.serialize_field("points", &pts)?;
        st.end()
    }
}

/// Evaluate `equation` over `grid` (over `grid × grid` for bivariate ones).
pub fn scan(equation: &Equation, f: &LtFunction, grid: &EvalGrid) -> Result<ResidualReport> {
    let args: Vec<(f64, Option<f64>)> = if equation.is_bivariate() {
        grid.points()
            .iter()
            .flat_map(|&s| grid.points().iter().map(move |&t| (s, Some(t))))
            .collect()
    } else {
        grid.points().iter().map(|&s| (s, None)).collect()
    };
    let points = args
        .par_iter()
        .map(|&(s, t)| {
            let value = equation.residual(f, s, t.unwrap_or(s))?;
            Ok(ResidualPoint { s, t, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_points(*equation, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expo(mean: f64) -> LtFunction {
        LtFunction::analytic(DistSpec::exponential(mean).unwrap()).unwrap()
    }

    fn gamma2() -> LtFunction {
        LtFunction::analytic(DistSpec::gamma(2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn independence_examples() {
        assert!(residual_independence(&expo(1.0), 0.3, 1.0, 1.0, 1.0, 2.0).unwrap().abs() < 1e-14);
        assert_eq!(residual_independence(&gamma2(), 0.4, 2.0, 3.0, 0.0, 0.0).unwrap(), 0.0);
        // Oracle: f = (1+s)^-2 at p = 1/2, s = t = 1:
        // joint = f(1)·f(1) = 1/16; marginals = (4/9)(5/8) each.
        let want = 1.0 / 16.0 - (4.0f64 / 9.0 * 0.625).powi(2);
        let r = residual_independence(&gamma2(), 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((r - want).abs() < 1e-15);
        assert!(r.abs() > 0.01);
    }

    #[test]
    fn independence_rescaling_identity() {
        let f = gamma2();
        for &(a, b, s, t) in &[(2.0, 0.5, 0.3, 1.7), (0.25, 4.0, 2.0, 0.5), (0.5, 0.5, 1.0, 1.0)] {
            let lhs = residual_independence(&f, 0.3, a, b, s, t).unwrap();
            let rhs = residual_independence(&f, 0.3, 1.0, 1.0, a * s, b * t).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn diagonal_examples() {
        for lam in [0.25, 1.0, 7.0] {
            assert!(residual_diagonal(&expo(lam), 0.4, 3.0).unwrap().abs() < 1e-14);
        }
        assert_eq!(residual_diagonal(&gamma2(), 0.5, 0.0).unwrap(), 0.0);
        let want = 1.0 / 16.0 - (4.0f64 / 9.0).powi(2) * 0.390625;
        let r = residual_diagonal(&gamma2(), 0.5, 1.0).unwrap();
        assert!((r - want).abs() < 1e-15);
        assert!((r + 0.0147).abs() < 5e-4);
    }

    #[test]
    fn fixedpoint_examples() {
        assert!(residual_fixedpoint(&expo(1.0), 0.5, 2.0).unwrap().abs() < 1e-14);
        assert_eq!(residual_fixedpoint(&gamma2(), 0.5, 0.0).unwrap(), 0.0);
        let want = 0.25 - 4.0 / 9.0 * (0.125 + 0.5);
        assert!((residual_fixedpoint(&gamma2(), 0.5, 1.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn abforms_examples() {
        assert!(residual_abforms(&expo(2.0), 0.5, 0.2, 0.8, 1.0).unwrap().abs() < 1e-14);
        assert_eq!(residual_abforms(&gamma2(), 0.5, 0.2, 0.8, 0.0).unwrap(), 0.0);
        // (1.2)^-2 (1.8)^-2 - (1.5)^-2 (0.5 (1.2)^-2 + 0.5 (1.8)^-2)
        let want = 1.0 / (1.44 * 3.24) - (0.5 / 1.44 + 0.5 / 3.24) / 2.25;
        let r = residual_abforms(&gamma2(), 0.5, 0.2, 0.8, 1.0).unwrap();
        assert!((r - want).abs() < 1e-15 && r.abs() > 1e-4);
        assert!(residual_abforms(&gamma2(), 0.5, 0.8, 0.2, 1.0).is_err());
    }

    #[test]
    fn geometric_examples() {
        assert!(residual_geometric(&expo(1.0), 0.3, 0.7, 2.0).unwrap().abs() < 1e-14);
        assert!(residual_geometric(&expo(1.0), 0.3, 0.6, 1.0).unwrap().abs() < 1e-14);
        assert_eq!(residual_geometric(&gamma2(), 0.3, 0.6, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn regression_examples() {
        assert!(residual_regression(&expo(1.0), 0.5, 1.0, 1.0).unwrap().abs() < 1e-14);
        assert_eq!(residual_regression(&gamma2(), 0.5, 2.0, 0.0).unwrap(), 0.0);
        // f = (1+t)^-2, f' = -2 (1+t)^-3, λ = 2, p = 1/2, t = 1
        let want = -0.5 * (-2.0 / 3.375) * (0.5 * 0.25 + 0.5) - 2.0 * 0.5 * (1.0 / 2.25) * 0.25;
        let r = residual_regression(&gamma2(), 0.5, 2.0, 1.0).unwrap();
        assert!((r - want).abs() < 1e-15 && r.abs() > 1e-3);
    }

    #[test]
    fn p_invariance_examples() {
        assert!(residual_p_invariance(&expo(1.0), 0.2, 0.8, 3.0).unwrap().abs() < 1e-14);
        assert_eq!(residual_p_invariance(&gamma2(), 0.2, 0.8, 0.0).unwrap(), 0.0);
        let side = |p: f64| (1.0 + (1.0 - p)).powi(-2) * (1.0 - p + p * 0.25);
        let r = residual_p_invariance(&gamma2(), 0.2, 0.8, 1.0).unwrap();
        assert!((r - (side(0.2) - side(0.8))).abs() < 1e-15 && r.abs() > 1e-3);
        assert!(residual_p_invariance(&gamma2(), 0.3, 0.3, 1.0).is_err());
    }

    fn all_equations(mean: f64) -> Vec<Equation> {
        vec![
            Equation::Independence { p: 0.3, a: 1.0, b: 2.0 },
            Equation::Diagonal { p: 0.4 },
            Equation::FixedPoint { p: 0.5 },
            Equation::AbForms { p: 0.5, a: 0.2, b: 0.8 },
            Equation::Geometric { p: 0.3, q: 0.7 },
            Equation::Geometric { p: 0.3, q: 0.6 },
            Equation::Regression { p: 0.5, mean },
            Equation::PInvariance { p1: 0.2, p2: 0.8 },
        ]
    }

    #[test]
    fn exponential_scans_vanish() {
        let grid = EvalGrid::default();
        for lam in [0.25, 1.0, 4.0] {
            for eq in all_equations(lam) {
                let rep = scan(&eq, &expo(lam), &grid).unwrap();
                assert!(rep.max_abs < 1e-12, "{} λ={lam}: {}", eq.tag(), rep.max_abs);
            }
        }
    }

    #[test]
    fn everything_vanishes_at_origin() {
        let fs = [gamma2(), LtFunction::analytic(DistSpec::Uniform01).unwrap()];
        for f in &fs {
            for eq in all_equations(f.mean().unwrap()) {
                assert_eq!(eq.residual(f, 0.0, 0.0).unwrap(), 0.0, "{}", eq.tag());
            }
        }
    }

    #[test]
    fn single_point_scan_reproduces_residual() {
        let g = EvalGrid::new(vec![1.0]).unwrap();
        let eq = Equation::Diagonal { p: 0.5 };
        let rep = scan(&eq, &gamma2(), &g).unwrap();
        assert_eq!(rep.points.len(), 1);
        assert_eq!(rep.max_abs, residual_diagonal(&gamma2(), 0.5, 1.0).unwrap().abs());
        assert_eq!(rep.rms, rep.max_abs);
    }

    #[test]
    fn gamma_diagonal_scan_catches_violation() {
        let mut pts = EvalGrid::default().points().to_vec();
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let g = EvalGrid::new(pts).unwrap();
        let rep = scan(&Equation::Diagonal { p: 0.5 }, &gamma2(), &g).unwrap();
        assert!(rep.max_abs >= 0.0147);
        assert!(!rep.is_analytic_zero());
    }

    #[test]
    fn grid_validation() {
        assert!(EvalGrid::new(vec![]).is_err());
        assert!(EvalGrid::new(vec![1.0, 1.0]).is_err());
        assert!(EvalGrid::new(vec![0.0, 1.0]).is_err());
        assert!(EvalGrid::new(vec![1.0, f64::INFINITY]).is_err());
        let g = EvalGrid::default();
        assert_eq!(g.len(), 50);
        assert_eq!(g.points()[0], 0.01);
        assert_eq!(g.points()[49], 10.0);
        assert!(serde_json::from_str::<EvalGrid>("[2.0, 1.0]").is_err());
    }

    #[test]
    fn empirical_transform_is_normalized() {
        let b = DistSpec::gamma(2.0, 1.0).unwrap().sample(1000, 5).unwrap();
        let f = LtFunction::empirical(b.clone()).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert!((f.mean().unwrap() - b.mean()).abs() < 1e-12);
    }

    #[test]
    fn report_json_shape() {
        let g = EvalGrid::new(vec![0.5, 1.0]).unwrap();
        let rep = scan(&Equation::Independence { p: 0.5, a: 1.0, b: 1.0 }, &gamma2(), &g).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["equation"], "independence");
        assert_eq!(v["points"].as_array().unwrap().len(), 4);
        assert_eq!(v["points"][0].as_array().unwrap().len(), 3);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l == "s,t,residual"));
    }
}
