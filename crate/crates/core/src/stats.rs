//! Calibrated hypothesis tests built from the characterizations.
//!
//! * `lt_factorization_test`: joint Laplace transform of `(L1, L2)` against
//!   the product of its marginals, calibrated by permutation.
//! * `ks_two_sample`: Kolmogorov–Smirnov with the asymptotic p-value.
//! * `regression_constancy_test`: binned conditional means of `L2` given
//!   `L1`, calibrated by Monte Carlo under the exponential law.
//! * `p_invariance_test`: KS between mixtures at two values of `p`.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{DistSpec, SampleBatch};
use crate::error::{Error, Result};
use crate::forms::{self, check_unit, Coupling, PairedSample};
use crate::laplace::EvalGrid;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestTag {
    LtFactorization,
    KsTwoSample,
    RegressionConstancy,
    PInvariance,
}

impl TestTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestTag::LtFactorization => "lt_factorization",
            TestTag::KsTwoSample => "ks_two_sample",
            TestTag::RegressionConstancy => "regression_constancy",
            TestTag::PInvariance => "p_invariance",
        }
    }

    pub const ALL: [TestTag; 4] = [
        TestTag::LtFactorization,
        TestTag::KsTwoSample,
        TestTag::RegressionConstancy,
        TestTag::PInvariance,
    ];
}

/// How the decision threshold was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Calibration {
    PermutationPValue { p_value: f64, n_perm: usize },
    AsymptoticPValue { p_value: f64 },
    /// Reject when the statistic exceeds `quantile`, the Monte Carlo null
    /// order statistic at level `alpha`.
    MonteCarloQuantile { quantile: f64, n_mc: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Consistent,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestTag,
    pub statistic: f64,
    pub calibration: Calibration,
    pub alpha: f64,
    pub decision: Decision,
    pub seed: u64,
    pub n: usize,
}

impl TestResult {
    fn new(test: TestTag, statistic: f64, calibration: Calibration, alpha: f64, seed: u64, n: usize) -> Self {
        let reject = match calibration {
            Calibration::PermutationPValue { p_value, .. } | Calibration::AsymptoticPValue { p_value } => {
                p_value < alpha
            }
            Calibration::MonteCarloQuantile { quantile, .. } => statistic > quantile,
        };
        TestResult {
            test,
            statistic,
            calibration,
            alpha,
            decision: if reject { Decision::Rejected } else { Decision::Consistent },
            seed,
            n,
        }
    }

    pub fn rejected(&self) -> bool {
        self.decision == Decision::Rejected
    }

    /// The p-value, when the calibration produces one.
    pub fn p_value(&self) -> Option<f64> {
        match self.calibration {
            Calibration::PermutationPValue { p_value, .. } | Calibration::AsymptoticPValue { p_value } => {
                Some(p_value)
            }
            Calibration::MonteCarloQuantile { .. } => None,
        }
    }

    pub const CSV_HEADER: [&'static str; 9] = [
        "test",
        "statistic",
        "calibration",
        "p_value",
        "threshold",
        "replicates",
        "alpha",
        "decision",
        "n",
    ];

    /// One CSV row matching `CSV_HEADER`; the seed lives in the metadata.
    pub fn csv_record(&self) -> Vec<String> {
        let (kind, p, thr, reps) = match self.calibration {
            Calibration::PermutationPValue { p_value, n_perm } => {
                ("permutation", crate::num(p_value), String::new(), n_perm.to_string())
            }
            Calibration::AsymptoticPValue { p_value } => ("asymptotic", crate::num(p_value), String::new(), String::new()),
            Calibration::MonteCarloQuantile { quantile, n_mc } => {
                ("monte_carlo", String::new(), crate::num(quantile), n_mc.to_string())
            }
        };
        vec![
            self.test.as_str().to_string(),
            crate::num(self.statistic),
            kind.to_string(),
            p,
            thr,
            reps,
            crate::num(self.alpha),
            match self.decision {
                Decision::Consistent => "consistent".into(),
                Decision::Rejected => "rejected".into(),
            },
            self.n.to_string(),
        ]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn all_equal(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Default 7-point grid on `[0.05, 3]` used for both `s` and `t`.
pub fn default_lt_grid() -> EvalGrid {
    EvalGrid::log_spaced(0.05, 3.0, 7).expect("static grid")
}

pub const MIN_LT_N: usize = 1000;
pub const MIN_PERM: usize = 199;

/// Factorization gap `max_{s,t} |Ê e^{-sL1-tL2} - Ê e^{-sL1} Ê e^{-tL2}|`.
pub fn lt_factorization_test(
    pairs: &PairedSample,
    grid: &EvalGrid,
    n_perm: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    if pairs.coupling != Coupling::Coupled {
        return Err(Error::Misuse("the factorization test needs coupled pairs".into()));
    }
    let n = pairs.n();
    if n < MIN_LT_N {
        return Err(Error::ParameterDomain(format!("need n >= {MIN_LT_N}, got {n}")));
    }
    if n_perm < MIN_PERM {
        return Err(Error::ParameterDomain(format!("need n_perm >= {MIN_PERM}, got {n_perm}")));
    }
    if all_equal(&pairs.left) || all_equal(&pairs.right) {
        return Err(Error::DegenerateSample("a coordinate of the pairs is constant".into()));
    }
    let g = grid.points();
    let m = g.len();
    // Rows of e^{-tL2} padded to whole lanes of four so the inner update
    // has a fixed width.
    let lanes = m.div_ceil(4);
    let es: Vec<f64> = pairs.left.iter().flat_map(|&x| g.iter().map(move |&s| (-s * x).exp())).collect();
    let mut ft = vec![[0.0f64; 4]; n * lanes];
    for (i, &y) in pairs.right.iter().enumerate() {
        for (b, &t) in g.iter().enumerate() {
            ft[i * lanes + b / 4][b % 4] = (-t * y).exp();
        }
    }
    let mut me = vec![0.0; m];
    for row in es.chunks_exact(m) {
        for (a, x) in me.iter_mut().zip(row) {
            *a += x;
        }
    }
    let mut mf = vec![0.0; m];
    for row in ft.chunks_exact(lanes) {
        for (b, v) in mf.iter_mut().enumerate() {
            *v += row[b / 4][b % 4];
        }
    }
    for v in me.iter_mut().chain(mf.iter_mut()) {
        *v /= n as f64;
    }
    let gap = |joint: &[[f64; 4]]| -> f64 {
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let j = joint[a * lanes + b / 4][b % 4];
                worst = worst.max((j / n as f64 - me[a] * mf[b]).abs());
            }
        }
        worst
    };
    let mut joint = vec![[0.0f64; 4]; m * lanes];
    cross_moments(&es, &ft, None, m, lanes, &mut joint);
    let observed = gap(&joint);
    let exceed = (0..n_perm)
        .into_par_iter()
        .map_init(
            || (vec![Vec::new(); SHUFFLE_BUCKETS], Vec::new()),
            |(buckets, order), j| {
                let mut r = rng::stream(seed, "stats/lt-permutation", j as u64);
                let joint = permuted_cross_moments(&es, &ft, m, lanes, &mut r, buckets, order);
                usize::from(gap(&joint) >= observed)
            },
        )
        .sum::<usize>();
    let p_value = (1 + exceed) as f64 / (n_perm + 1) as f64;
    Ok(TestResult::new(
        TestTag::LtFactorization,
        observed,
        Calibration::PermutationPValue { p_value, n_perm },
        alpha,
        seed,
        n,
    ))
}

/// Adds `Σ_i e_i ⊗ f_{order(i)}` to `joint`; `f` rows are stored as lanes
/// of four and `order` defaults to the identity.
fn cross_moments(es: &[f64], ft: &[[f64; 4]], order: Option<&[u32]>, m: usize, lanes: usize, joint: &mut [[f64; 4]]) {
    // Fixed sizes let the compiler keep the accumulators in registers.
    macro_rules! fixed {
        ($($m:literal => $l:literal),*) => {
            match m {
                $($m => return cross_moments_fixed::<$m, $l>(es, ft, order, joint),)*
                _ => {}
            }
        };
    }
    fixed!(1 => 1, 2 => 1, 3 => 1, 4 => 1, 5 => 2, 6 => 2, 7 => 2, 8 => 2, 9 => 3, 10 => 3, 11 => 3, 12 => 3);
    for (i, e) in es.chunks_exact(m).enumerate() {
        let j = order.map_or(i, |o| o[i] as usize);
        let f = &ft[j * lanes..(j + 1) * lanes];
        for (a, &ea) in e.iter().enumerate() {
            for (acc, fb) in joint[a * lanes..(a + 1) * lanes].iter_mut().zip(f) {
                for l in 0..4 {
                    acc[l] += ea * fb[l];
                }
            }
        }
    }
}

fn cross_moments_fixed<const M: usize, const L: usize>(
    es: &[f64],
    ft: &[[f64; 4]],
    order: Option<&[u32]>,
    joint: &mut [[f64; 4]],
) {
    let mut acc = [[[0.0f64; 4]; L]; M];
    for a in 0..M {
        acc[a].copy_from_slice(&joint[a * L..(a + 1) * L]);
    }
    for (i, e) in es.chunks_exact(M).enumerate() {
        let j = order.map_or(i, |o| o[i] as usize);
        let e: &[f64; M] = e.try_into().expect("row width");
        let f: &[[f64; 4]; L] = ft[j * L..(j + 1) * L].try_into().expect("row width");
        for a in 0..M {
            for k in 0..L {
                for l in 0..4 {
                    acc[a][k][l] += e[a] * f[k][l];
                }
            }
        }
    }
    for a in 0..M {
        joint[a * L..(a + 1) * L].copy_from_slice(&acc[a]);
    }
}

const SHUFFLE_BUCKETS: usize = 64;

/// Cross moments of `e` against a uniformly permuted copy of the `f` rows.
///
/// Every `f` row is sent to a uniformly chosen bucket; bucket `b` is then
/// paired, in uniformly random order, with the next block of `e` rows. The
/// composite pairing is a uniform permutation, and each bucket is small
/// enough to stay in cache while it is read.
fn permuted_cross_moments<R: rand::Rng>(
    es: &[f64],
    ft: &[[f64; 4]],
    m: usize,
    lanes: usize,
    r: &mut R,
    buckets: &mut [Vec<[f64; 4]>],
    order: &mut Vec<u32>,
) -> Vec<[f64; 4]> {
    for b in buckets.iter_mut() {
        b.clear();
    }
    for row in ft.chunks_exact(lanes) {
        buckets[r.random_range(0..SHUFFLE_BUCKETS)].extend_from_slice(row);
    }
    let mut joint = vec![[0.0f64; 4]; m * lanes];
    let mut start = 0;
    for b in buckets.iter() {
        let rows = b.len() / lanes;
        order.clear();
        order.extend(0..rows as u32);
        order.shuffle(r);
        cross_moments(&es[start * m..(start + rows) * m], b, Some(order), m, lanes, &mut joint);
        start += rows;
    }
    joint
}

/// Two-sample KS statistic `sup |F_x - F_y|`, computed with exact integer
/// arithmetic on the merged order.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::ParameterDomain("KS needs two nonempty samples".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::ParameterDomain("KS samples contain NaN".into()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (n, m) = (xs.len() as i128, ys.len() as i128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i128 = 0;
    while i < xs.len() && j < ys.len() {
        let v = match xs[i].total_cmp(&ys[j]) {
            Ordering::Greater => ys[j],
            _ => xs[i],
        };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        best = best.max((i as i128 * m - j as i128 * n).abs());
    }
    Ok(best as f64 / (n * m) as f64)
}

/// Kolmogorov survival function `Q(λ) = P(K > λ)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let s: f64 = (0..8).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        let s: f64 = (1..=8)
            .map(|j: i32| if j % 2 == 1 { 1.0 } else { -1.0 } * x.powi(j * j))
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value of statistic `d` for sample sizes `n`, `m`, with the
/// usual small-sample correction of `λ`.
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    kolmogorov_q((en + 0.12 + 0.11 / en) * d)
}

fn ks_result(x: &[f64], y: &[f64], tag: TestTag, alpha: f64, seed: u64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let d = ks_statistic(x, y)?;
    let p_value = ks_p_value(d, x.len(), y.len());
    Ok(TestResult::new(
        tag,
        d,
        Calibration::AsymptoticPValue { p_value },
        alpha,
        seed,
        x.len().min(y.len()),
    ))
}

/// KS test of `x ≗ y`. The batches must not share draws; batches with equal
/// seed, stream and spec are identical and give `D = 0`.
pub fn ks_two_sample(x: &SampleBatch, y: &SampleBatch, alpha: f64) -> Result<TestResult> {
    ks_result(&x.values, &y.values, TestTag::KsTwoSample, alpha, x.seed)
}

/// KS between the columns of a pair sample. Coupled pairs are refused.
pub fn ks_pairs(pairs: &PairedSample, alpha: f64) -> Result<TestResult> {
    if pairs.coupling == Coupling::Coupled {
        return Err(Error::Misuse(
            "KS calibration assumes independent samples; got coupled pairs".into(),
        ));
    }
    ks_result(&pairs.left, &pairs.right, TestTag::KsTwoSample, alpha, pairs.seed)
}

pub const MIN_REGRESSION_N: usize = 10_000;
pub const MIN_BINS: usize = 5;

/// Max standardized deviation of binned conditional means of the right
/// column from its grand mean. Bins hold equal counts of the left column.
pub fn regression_statistic(left: &[f64], right: &[f64], n_bins: usize) -> Result<f64> {
    let n = left.len();
    if right.len() != n {
        return Err(Error::ParameterDomain("columns differ in length".into()));
    }
    if n_bins == 0 || n < n_bins {
        return Err(Error::Binning(format!("{n} observations cannot fill {n_bins} bins")));
    }
    let grand = right.iter().sum::<f64>() / n as f64;
    let var = right.iter().map(|y| (y - grand).powi(2)).sum::<f64>() / (n - 1).max(1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 || all_equal(left) {
        return Err(Error::DegenerateSample("a coordinate of the pairs is constant".into()));
    }
    let ranks: Vec<usize> = (1..n_bins).map(|b| b * n / n_bins).collect();
    let (sums, counts) = match bin_by_value(left, right, &ranks) {
        Some(found) => found,
        None => bin_by_rank(left, right, &ranks),
    };
    if counts.contains(&0) {
        return Err(Error::Binning("empty bin".into()));
    }
    let scale = sd * (n_bins as f64 / n as f64).sqrt();
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| (s / c as f64 - grand).abs() / scale)
        .fold(0.0, f64::max))
}

/// Bin sums and counts when cutting at the values of the given ranks; `None`
/// if ties make the counts differ from the rank gaps.
fn bin_by_value(left: &[f64], right: &[f64], ranks: &[usize]) -> Option<(Vec<f64>, Vec<usize>)> {
    let n = left.len();
    let mut vals = left.to_vec();
    let mut cuts = Vec::with_capacity(ranks.len());
    let mut lo = 0;
    for &r in ranks {
        let (_, nth, _) = vals[lo..].select_nth_unstable_by(r - lo, f64::total_cmp);
        cuts.push(*nth);
        lo = r;
    }
    let bins = ranks.len() + 1;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (&x, &y) in left.iter().zip(right) {
        let bin = cuts.partition_point(|c| c.total_cmp(&x) != Ordering::Greater);
        sums[bin] += y;
        counts[bin] += 1;
    }
    let bounds: Vec<usize> = std::iter::once(0).chain(ranks.iter().copied()).chain(std::iter::once(n)).collect();
    let expected = bounds.windows(2).map(|w| w[1] - w[0]);
    counts.iter().copied().eq(expected).then_some((sums, counts))
}

/// Exact equal-count binning under the order `(value, index)`.
fn bin_by_rank(left: &[f64], right: &[f64], ranks: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let key = |i: usize| (left[i], i);
    let cmp = |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
    let mut keys: Vec<(f64, usize)> = (0..left.len()).map(key).collect();
    let mut cuts = Vec::with_capacity(ranks.len());
    let mut lo = 0;
    for &r in ranks {
        let (_, nth, _) = keys[lo..].select_nth_unstable_by(r - lo, cmp);
        cuts.push(*nth);
        lo = r;
    }
    let bins = ranks.len() + 1;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (i, &y) in right.iter().enumerate() {
        let k = key(i);
        let bin = cuts.partition_point(|c| cmp(c, &k) != Ordering::Greater);
        sums[bin] += y;
        counts[bin] += 1;
    }
    (sums, counts)
}

/// Order statistic used as the Monte Carlo critical value: the
/// `ceil((1-α)(n_mc+1))`-th smallest null value, or `+∞` if that exceeds
/// `n_mc`.
pub fn monte_carlo_quantile(mut null: Vec<f64>, alpha: f64) -> f64 {
    null.sort_unstable_by(f64::total_cmp);
    let r = ((1.0 - alpha) * (null.len() + 1) as f64 - 1e-9).ceil() as usize;
    if r == 0 {
        f64::NEG_INFINITY
    } else if r > null.len() {
        f64::INFINITY
    } else {
        null[r - 1]
    }
}

/// Conditional-mean constancy test for pairs from `simulate_pair_transform`
/// at mixing parameter `p`.
pub fn regression_constancy_test(
    pairs: &PairedSample,
    p: f64,
    n_bins: usize,
    alpha: f64,
    n_mc: usize,
    seed: u64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    check_unit("p", p)?;
    if pairs.coupling != Coupling::Coupled {
        return Err(Error::Misuse("the regression test needs coupled pairs".into()));
    }
    let n = pairs.n();
    if n_bins < MIN_BINS {
        return Err(Error::ParameterDomain(format!("need n_bins >= {MIN_BINS}, got {n_bins}")));
    }
    if n < n_bins {
        return Err(Error::Binning(format!("{n} observations cannot fill {n_bins} bins")));
    }
    if n < MIN_REGRESSION_N {
        return Err(Error::ParameterDomain(format!("need n >= {MIN_REGRESSION_N}, got {n}")));
    }
    if n_mc == 0 {
        return Err(Error::ParameterDomain("need at least one Monte Carlo replicate".into()));
    }
    let stat = regression_statistic(&pairs.left, &pairs.right, n_bins)?;
    let quantile = monte_carlo_quantile(regression_null(p, n, n_bins, n_mc, seed)?, alpha);
    Ok(TestResult::new(
        TestTag::RegressionConstancy,
        stat,
        Calibration::MonteCarloQuantile { quantile, n_mc },
        alpha,
        seed,
        n,
    ))
}

/// Null replicates of the regression statistic under Exponential(1).
pub fn regression_null(p: f64, n: usize, n_bins: usize, n_mc: usize, seed: u64) -> Result<Vec<f64>> {
    let exp1 = DistSpec::Exponential { mean: 1.0 };
    (0..n_mc)
        .into_par_iter()
        .map(|j| {
            let sub = rng::derive_seed(seed, "stats/regression-null", j as u64);
            let s = forms::simulate_pair_transform(&exp1, p, n, sub)?;
            regression_statistic(&s.left, &s.right, n_bins)
        })
        .collect()
}

/// KS between `(1-p1)X + ε_{p1}Y` and `(1-p2)X + ε_{p2}Y` drawn from
/// independent streams.
pub fn p_invariance_test(spec: &DistSpec, p1: f64, p2: f64, n: usize, alpha: f64, seed: u64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let x = forms::simulate_mixed(spec, p1, n, rng::derive_seed(seed, "stats/p-invariance", 1))?;
    let y = forms::simulate_mixed(spec, p2, n, rng::derive_seed(seed, "stats/p-invariance", 2))?;
    let mut r = ks_result(&x.values, &y.values, TestTag::PInvariance, alpha, seed)?;
    r.seed = seed;
    Ok(r)
}

/// Settings shared by the four tests of a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatterySettings {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub n: usize,
    pub alpha: f64,
    pub n_perm: usize,
    pub n_mc: usize,
    pub n_bins: usize,
    pub lt_grid: EvalGrid,
}

impl Default for BatterySettings {
    fn default() -> Self {
        BatterySettings {
            p: 0.5,
            p1: 0.2,
            p2: 0.8,
            n: 100_000,
            alpha: 0.01,
            n_perm: 199,
            n_mc: 99,
            n_bins: 10,
            lt_grid: default_lt_grid(),
        }
    }
}

/// Runs one test of the battery on freshly simulated data.
pub fn run_test(tag: TestTag, spec: &DistSpec, st: &BatterySettings, seed: u64) -> Result<TestResult> {
    let sub = |label: &str| rng::derive_seed(seed, label, 0);
    let mut r = match tag {
        TestTag::LtFactorization => {
            let pairs = forms::simulate_pair_transform(spec, st.p, st.n, sub("battery/lt-data"))?;
            lt_factorization_test(&pairs, &st.lt_grid, st.n_perm, st.alpha, sub("battery/lt-perm"))?
        }
        TestTag::KsTwoSample => {
            let mixed = forms::simulate_mixed(spec, st.p, st.n, sub("battery/ks-mixed"))?;
            let fresh = spec.sample(st.n, sub("battery/ks-fresh"))?;
            ks_two_sample(&mixed, &fresh, st.alpha)?
        }
        TestTag::RegressionConstancy => {
            let pairs = forms::simulate_pair_transform(spec, st.p, st.n, sub("battery/regression-data"))?;
            regression_constancy_test(&pairs, st.p, st.n_bins, st.alpha, st.n_mc, sub("battery/regression-null"))?
        }
        TestTag::PInvariance => p_invariance_test(spec, st.p1, st.p2, st.n, st.alpha, sub("battery/p-invariance"))?,
    };
    r.seed = seed;
    Ok(r)
}

/// All four tests, in `TestTag::ALL` order.
pub fn run_battery(spec: &DistSpec, st: &BatterySettings, seed: u64) -> Result<Vec<TestResult>> {
    TestTag::ALL.iter().map(|&t| run_test(t, spec, st, seed)).collect()
}
