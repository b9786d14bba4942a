//! Command-line driver: configuration, the four commands and report output.
//!
//! Values are resolved in the order defaults, then `--config` file, then
//! flags. Every report embeds the resolved configuration (minus the output
//! path and thread count, which never change results), so a report can be
//! passed back through `--config` to reproduce itself.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contraction::{self, ContractionParams, GridFunction};
use crate::distributions::DistSpec;
use crate::error::{Error, Result};
use crate::forms::FormParams;
use crate::laplace::{self, Equation, EvalGrid, LtFunction, ResidualReport};
use crate::series::{self, TaylorSeries};
use crate::stats::{self, BatterySettings, TestResult, TestTag};

/// Exit code for a run that completed.
pub const EXIT_OK: i32 = 0;
/// Exit code for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical failures, and for analytic checks whose outcome
/// contradicts the distribution family.
pub const EXIT_NUMERIC: i32 = 3;

/// Tolerance on series coefficients in `series-check`.
pub const SERIES_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    VerifyAnalytic,
    SeriesCheck,
    Contraction,
    Test,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::VerifyAnalytic => "verify-analytic",
            CommandName::SeriesCheck => "series-check",
            CommandName::Contraction => "contraction",
            CommandName::Test => "test",
        }
    }
}

/// Log-spaced grid `points` values on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSettings {
    pub fn build(&self) -> Result<EvalGrid> {
        EvalGrid::log_spaced(self.lo, self.hi, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSettings {
    pub p: f64,
    pub q: f64,
    pub mean: f64,
    pub order: usize,
    /// `a`, `b` and the largest `j` for the moment non-equality check.
    pub a: f64,
    pub b: f64,
    pub neq_max_j: usize,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        SeriesSettings {
            p: 0.3,
            q: 0.6,
            mean: 1.0,
            order: 8,
            a: 0.2,
            b: 0.8,
            neq_max_j: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContractionSettings {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub pairs: usize,
    pub iterations: usize,
    /// Number of random triples to sweep; 0 skips the sweep.
    pub sweep: usize,
}

impl Default for ContractionSettings {
    fn default() -> Self {
        ContractionSettings {
            p: 0.5,
            a: 0.2,
            b: 0.8,
            pairs: 100,
            iterations: 20,
            sweep: 0,
        }
    }
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub command: Option<CommandName>,
    pub dist: DistSpec,
    /// Distributions for `test`; empty means `[dist]`.
    pub dists: Vec<DistSpec>,
    pub forms: FormParams,
    pub p1: f64,
    pub p2: f64,
    pub grid: GridSettings,
    pub series: SeriesSettings,
    pub contraction: ContractionSettings,
    pub n: usize,
    pub n_perm: usize,
    pub n_mc: usize,
    pub n_bins: usize,
    pub alpha: f64,
    pub lt_grid: GridSettings,
    pub tests: Vec<TestTag>,
    pub replicates: usize,
    pub seed: u64,
    pub format: Format,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let st = BatterySettings::default();
        ExperimentConfig {
            command: None,
            dist: DistSpec::Exponential { mean: 1.0 },
            dists: Vec::new(),
            forms: FormParams::default(),
            p1: st.p1,
            p2: st.p2,
            grid: GridSettings {
                lo: 0.01,
                hi: 10.0,
                points: 50,
            },
            series: SeriesSettings::default(),
            contraction: ContractionSettings::default(),
            n: st.n,
            n_perm: st.n_perm,
            n_mc: st.n_mc,
            n_bins: st.n_bins,
            alpha: st.alpha,
            lt_grid: GridSettings {
                lo: 0.05,
                hi: 3.0,
                points: 7,
            },
            tests: TestTag::ALL.to_vec(),
            replicates: 1,
            seed: 0,
            format: Format::Json,
            out: None,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file, or the `config` member of an emitted report.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut v: Value = serde_json::from_str(text)?;
        if let Some(inner) = v.get("config").filter(|_| v.get("results").is_some()) {
            v = inner.clone();
        }
        Ok(serde_json::from_value(v)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        for d in &self.dists {
            d.validate()?;
        }
        self.forms.validate()?;
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::ParameterDomain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        self.grid.build()?;
        self.lt_grid.build()?;
        if self.n == 0 || self.replicates == 0 {
            return Err(Error::ParameterDomain("n and replicates must be positive".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::Config("no tests selected".into()));
        }
        Ok(())
    }

    /// The configuration as embedded in reports.
    pub fn embedded(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    fn battery(&self) -> Result<BatterySettings> {
        Ok(BatterySettings {
            p: self.forms.p,
            p1: self.p1,
            p2: self.p2,
            n: self.n,
            alpha: self.alpha,
            n_perm: self.n_perm,
            n_mc: self.n_mc,
            n_bins: self.n_bins,
            lt_grid: self.lt_grid.build()?,
        })
    }
}

/// Characterizations of the exponential law through random linear forms.
#[derive(Debug, Parser)]
#[command(name = "expochar", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residuals of every characterization equation for an analytic Laplace
    /// transform. Exit 0 when an exponential law satisfies all equations or
    /// a non-exponential law violates at least one.
    VerifyAnalytic(VerifyArgs),
    /// Coefficients recovered by the series recursions and their deviation
    /// from the exponential series.
    SeriesCheck(SeriesArgs),
    /// Contraction constants, observed contraction ratios and the decay of
    /// iterates in the weighted metric.
    Contraction(ContractionArgs),
    /// The statistical test battery on simulated data.
    Test(TestArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON config file (or an emitted report).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: json].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 uses every core [default: 0].
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct DistArgs {
    /// Distribution as JSON or `family:key=value,...`, e.g. `gamma:shape=2,rate=1`
    /// [default: exponential:mean=1].
    #[arg(long, value_parser = parse_dist)]
    pub dist: Option<DistSpec>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    /// Mixing probability [default: 0.5].
    #[arg(long)]
    pub p: Option<f64>,
    /// Coefficient a [default: 0.2].
    #[arg(long)]
    pub a: Option<f64>,
    /// Coefficient b [default: 0.8].
    #[arg(long)]
    pub b: Option<f64>,
    /// Geometric parameter q [default: 0.3].
    #[arg(long)]
    pub q: Option<f64>,
    /// Grid points, log-spaced on [0.01, 10] by default [default: 50].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mixing probability [default: 0.3].
    #[arg(long)]
    pub p: Option<f64>,
    /// Geometric parameter q [default: 0.6].
    #[arg(long)]
    pub q: Option<f64>,
    /// Mean λ fixing the first-order coefficient [default: 1].
    #[arg(long)]
    pub mean: Option<f64>,
    /// Highest order K [default: 8].
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ContractionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mixing probability [default: 0.5].
    #[arg(long)]
    pub p: Option<f64>,
    /// Coefficient a [default: 0.2].
    #[arg(long)]
    pub a: Option<f64>,
    /// Coefficient b [default: 0.8].
    #[arg(long)]
    pub b: Option<f64>,
    /// Random test-function pairs [default: 100].
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Operator iterations [default: 20].
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Also sweep this many random admissible triples [default: 0].
    #[arg(long)]
    pub sweep: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    /// Sample size [default: 100000].
    #[arg(long)]
    pub n: Option<usize>,
    /// Level [default: 0.01].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Permutations for the factorization test [default: 199].
    #[arg(long)]
    pub n_perm: Option<usize>,
    /// Monte Carlo replicates for the regression test [default: 99].
    #[arg(long)]
    pub n_mc: Option<usize>,
    /// Seeds per distribution; replicate r uses seed + r [default: 1].
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Mixing probability [default: 0.5].
    #[arg(long)]
    pub p: Option<f64>,
}

/// `family:key=value,...` or a JSON object.
pub fn parse_dist(text: &str) -> std::result::Result<DistSpec, String> {
    let text = text.trim();
    let value = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| e.to_string())?
    } else {
        let (family, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = serde_json::Map::new();
        for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{kv}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
            params.insert(k.trim().to_string(), json!(v));
        }
        json!({"family": family.trim(), "params": params})
    };
    serde_json::from_value(value).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn load(common: &CommonArgs, name: CommandName) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != name {
            return Err(Error::Config(format!(
                "config is for `{}`, not `{}`",
                c.as_str(),
                name.as_str()
            )));
        }
    }
    cfg.command = Some(name);
    set(&mut cfg.seed, common.seed);
    set(&mut cfg.format, common.format);
    set(&mut cfg.threads, common.threads);
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

/// Resolves the configuration for a parsed command line.
pub fn resolve(cmd: &Command) -> Result<ExperimentConfig> {
    let cfg = match cmd {
        Command::VerifyAnalytic(a) => {
            let mut cfg = load(&a.common, CommandName::VerifyAnalytic)?;
            set(&mut cfg.dist, a.dist.dist);
            set(&mut cfg.forms.p, a.p);
            set(&mut cfg.forms.a, a.a);
            set(&mut cfg.forms.b, a.b);
            set(&mut cfg.forms.q, a.q);
            set(&mut cfg.grid.points, a.points);
            cfg
        }
        Command::SeriesCheck(a) => {
            let mut cfg = load(&a.common, CommandName::SeriesCheck)?;
            set(&mut cfg.series.p, a.p);
            set(&mut cfg.series.q, a.q);
            set(&mut cfg.series.mean, a.mean);
            set(&mut cfg.series.order, a.order);
            cfg
        }
        Command::Contraction(a) => {
            let mut cfg = load(&a.common, CommandName::Contraction)?;
            let c = &mut cfg.contraction;
            set(&mut c.p, a.p);
            set(&mut c.a, a.a);
            set(&mut c.b, a.b);
            set(&mut c.pairs, a.pairs);
            set(&mut c.iterations, a.iterations);
            set(&mut c.sweep, a.sweep);
            cfg
        }
        Command::Test(a) => {
            let mut cfg = load(&a.common, CommandName::Test)?;
            if let Some(d) = a.dist.dist {
                cfg.dist = d;
                cfg.dists.clear();
            }
            set(&mut cfg.n, a.n);
            set(&mut cfg.alpha, a.alpha);
            set(&mut cfg.n_perm, a.n_perm);
            set(&mut cfg.n_mc, a.n_mc);
            set(&mut cfg.replicates, a.replicates);
            set(&mut cfg.forms.p, a.p);
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// A finished report and whether its outcome matched expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub expected: bool,
}

/// Runs a resolved configuration.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let run = || match cfg.command.unwrap_or(CommandName::VerifyAnalytic) {
        CommandName::VerifyAnalytic => verify_analytic(cfg),
        CommandName::SeriesCheck => series_check(cfg),
        CommandName::Contraction => contraction_report(cfg),
        CommandName::Test => test_battery(cfg),
    };
    if cfg.threads == 0 {
        return run();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?
        .install(run)
}

fn json_text(cfg: &ExperimentConfig, body: Value) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), json!(cfg.command.map(|c| c.as_str())));
    doc.insert("config".into(), cfg.embedded());
    if let Value::Object(m) = body {
        doc.extend(m);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(cfg: &ExperimentConfig, meta: &[(&str, String)], header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut buf = Vec::new();
    {
        use std::io::Write;
        writeln!(buf, "# command: {}", cfg.command.map_or("", |c| c.as_str()))?;
        writeln!(buf, "# config: {}", serde_json::to_string(&cfg.embedded())?)?;
        writeln!(buf, "# seed: {}", cfg.seed)?;
        for (k, v) in meta {
            writeln!(buf, "# {k}: {v}")?;
        }
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Equations checked by `verify-analytic`: the geometric one appears twice,
/// at `q = 1 - p` and at the configured `q`.
pub fn analytic_equations(cfg: &ExperimentConfig) -> Result<Vec<Equation>> {
    let FormParams { p, a, b, q } = cfg.forms;
    Ok(vec![
        Equation::Independence { p, a, b },
        Equation::Diagonal { p },
        Equation::FixedPoint { p },
        Equation::AbForms { p, a, b },
        Equation::Geometric { p, q: 1.0 - p },
        Equation::Geometric { p, q },
        Equation::Regression {
            p,
            mean: cfg.dist.mean()?,
        },
        Equation::PInvariance { p1: cfg.p1, p2: cfg.p2 },
    ])
}

pub fn residual_reports(cfg: &ExperimentConfig) -> Result<Vec<ResidualReport>> {
    let f = LtFunction::analytic(cfg.dist)?;
    let grid = cfg.grid.build()?;
    analytic_equations(cfg)?
        .iter()
        .map(|eq| laplace::scan(eq, &f, &grid))
        .collect()
}

fn status(r: &ResidualReport) -> &'static str {
    if r.is_analytic_zero() {
        "satisfied"
    } else {
        "VIOLATED"
    }
}

fn verify_analytic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let reports = residual_reports(cfg)?;
    let violated: Vec<&str> = reports
        .iter()
        .filter(|r| !r.is_analytic_zero())
        .map(|r| r.equation.tag())
        .collect();
    let exponential = cfg.dist.is_exponential();
    let expected = if exponential {
        violated.is_empty()
    } else {
        !violated.is_empty()
    };
    let text = match cfg.format {
        Format::Json => {
            let items: Vec<Value> = reports
                .iter()
                .map(|r| {
                    let mut v = serde_json::to_value(r).expect("report serializes");
                    v["status"] = json!(status(r));
                    v
                })
                .collect();
            json_text(
                cfg,
                json!({
                    "results": items,
                    "summary": {
                        "exponential": exponential,
                        "violated": violated,
                        "expected_outcome": expected,
                    }
                }),
            )?
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.equation.tag().to_string(),
                        serde_json::to_string(&r.equation).expect("equation serializes"),
                        crate::num(r.max_abs),
                        crate::num(r.rms),
                        status(r).to_string(),
                    ]
                })
                .collect();
            csv_text(
                cfg,
                &[("expected_outcome", expected.to_string())],
                &["equation", "params", "max_abs", "rms", "status"],
                &rows,
            )?
        }
    };
    Ok(Outcome { text, expected })
}

/// Result of the geometric recursion in `series-check`.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometricOutcome {
    Solved(TaylorSeries),
    DegenerateOrder { order: usize, coefficient: f64 },
}

fn deviation(got: &[f64], want: &[f64]) -> f64 {
    got.iter().zip(want).fold(0.0, |m, (g, w)| m.max((g - w).abs()))
}

fn series_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.series;
    let k = s.order;
    let geometric = match series::solve_geometric_recursion(s.p, s.q, s.mean, k) {
        Ok(c) => GeometricOutcome::Solved(c),
        Err(Error::NonUnique { order, coefficient }) => GeometricOutcome::DegenerateOrder { order, coefficient },
        Err(e) => return Err(e),
    };
    let regression = series::solve_regression_recursion(s.p, s.mean, k)?;
    let expo = TaylorSeries::exponential_lt(s.mean, k);
    let mut linear = vec![0.0; k + 1];
    linear[0] = 1.0;
    if k >= 1 {
        linear[1] = s.mean;
    }
    let neq = series::verify_neq_condition(s.p, s.a, s.b, s.neq_max_j)?;
    let reg_dev = deviation(regression.coeffs(), &linear);
    let geo_dev = match &geometric {
        GeometricOutcome::Solved(c) => Some(deviation(c.coeffs(), expo.coeffs())),
        GeometricOutcome::DegenerateOrder { .. } => None,
    };
    let expected = reg_dev < SERIES_TOL && geo_dev.is_none_or(|d| d < SERIES_TOL);
    let notice = match &geometric {
        GeometricOutcome::DegenerateOrder { order, coefficient } => Some(format!(
            "DEGENERATE-ORDER at k={order}: leading coefficient {} (tolerance {})",
            crate::num(*coefficient),
            crate::num(series::DEGENERATE_TOL)
        )),
        GeometricOutcome::Solved(_) => None,
    };
    let text = match cfg.format {
        Format::Json => {
            let geo = match &geometric {
                GeometricOutcome::Solved(c) => json!({
                    "status": "solved",
                    "coefficients": c.coeffs(),
                    "expected": expo.coeffs(),
                    "deviation": geo_dev,
                }),
                GeometricOutcome::DegenerateOrder { order, coefficient } => json!({
                    "status": "degenerate_order",
                    "order": order,
                    "coefficient": coefficient,
                    "notice": notice,
                }),
            };
            json_text(
                cfg,
                json!({
                    "results": {
                        "geometric": geo,
                        "regression": {
                            "coefficients": regression.coeffs(),
                            "expected": linear,
                            "deviation": reg_dev,
                        },
                        "neq": neq.iter().map(|(j, v)| json!([j, v])).collect::<Vec<_>>(),
                    },
                    "summary": {"tolerance": SERIES_TOL, "expected_outcome": expected},
                }),
            )?
        }
        Format::Csv => {
            let mut rows = Vec::new();
            if let GeometricOutcome::Solved(c) = &geometric {
                for (j, (g, w)) in c.coeffs().iter().zip(expo.coeffs()).enumerate() {
                    rows.push(vec!["geometric".into(), j.to_string(), crate::num(*g), crate::num(*w), (g - w).abs().to_string()]);
                }
            }
            for (j, (g, w)) in regression.coeffs().iter().zip(&linear).enumerate() {
                rows.push(vec!["regression".into(), j.to_string(), crate::num(*g), crate::num(*w), (g - w).abs().to_string()]);
            }
            for (j, v) in &neq {
                rows.push(vec!["neq".into(), j.to_string(), crate::num(*v), String::new(), String::new()]);
            }
            let mut meta = vec![("expected_outcome", expected.to_string())];
            if let Some(n) = notice {
                meta.push(("notice", n));
            }
            csv_text(cfg, &meta, &["series", "j", "coefficient", "expected", "deviation"], &rows)?
        }
    };
    Ok(Outcome { text, expected })
}

/// Norms `d(𝒜^n ζ0, 0)` for `ζ0(s) = s^(k+1) e^(-s)` on the default grid.
pub fn decay_curve(params: &ContractionParams, iterations: usize) -> Result<Vec<f64>> {
    let grid = std::sync::Arc::new(contraction::default_grid());
    let k = params.k as i32;
    let z0 = GridFunction::sample(grid, contraction::test_envelope(params), |s| {
        s.powi(k + 1) * (-s).exp()
    })?;
    contraction::iterate_to_fixed_point(&z0, params, iterations)
}

fn contraction_report(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = cfg.contraction;
    let params = contraction::derive_params(c.p, c.a, c.b)?;
    let (max_ratio, within) = match contraction::verify_contraction(&params, c.pairs, cfg.seed) {
        Ok(chk) => (chk.max_ratio, true),
        Err(Error::ContractionViolation { ratio, .. }) => (ratio, false),
        Err(e) => return Err(e),
    };
    let decay = decay_curve(&params, c.iterations)?;
    let sweep = if c.sweep > 0 {
        Some(contraction::sweep(&contraction::random_triples(c.sweep, cfg.seed))?)
    } else {
        None
    };
    let text = match cfg.format {
        Format::Json => json_text(
            cfg,
            json!({
                "results": {
                    "params": params,
                    "check": {
                        "pairs": c.pairs,
                        "max_ratio": max_ratio,
                        "bound": params.rho,
                        "tolerance": contraction::RATIO_TOL,
                        "status": if within { "within_bound" } else { "VIOLATED" },
                    },
                    "decay": decay,
                    "sweep": sweep.as_ref().map(|s| json!({
                        "triples": s.triples,
                        "min_rho": s.min_rho,
                        "max_rho": s.max_rho,
                        "min_k": s.min_k,
                        "max_k": s.max_k,
                        "all_below_one": s.max_rho < 1.0,
                        "params": s.params,
                    })),
                }
            }),
        )?,
        Format::Csv => {
            let mut meta = vec![
                ("params", serde_json::to_string(&params)?),
                ("max_ratio", crate::num(max_ratio)),
                ("status", if within { "within_bound" } else { "VIOLATED" }.to_string()),
            ];
            if let Some(s) = &sweep {
                meta.push(("sweep", format!(
                    "triples={} min_rho={} max_rho={} all_below_one={}",
                    s.triples,
                    crate::num(s.min_rho),
                    crate::num(s.max_rho),
                    s.max_rho < 1.0
                )));
            }
            let rows: Vec<Vec<String>> = decay
                .iter()
                .enumerate()
                .map(|(i, d)| vec![i.to_string(), crate::num(*d)])
                .collect();
            csv_text(cfg, &meta, &["iteration", "d"], &rows)?
        }
    };
    Ok(Outcome { text, expected: true })
}

/// One row of the `test` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryRow {
    pub dist: DistSpec,
    pub replicate: usize,
    pub result: TestResult,
}

pub fn battery_rows(cfg: &ExperimentConfig) -> Result<Vec<BatteryRow>> {
    let st = cfg.battery()?;
    let dists = if cfg.dists.is_empty() {
        vec![cfg.dist]
    } else {
        cfg.dists.clone()
    };
    let mut rows = Vec::new();
    for d in &dists {
        for r in 0..cfg.replicates {
            let seed = cfg.seed.wrapping_add(r as u64);
            for &t in &cfg.tests {
                rows.push(BatteryRow {
                    dist: *d,
                    replicate: r,
                    result: stats::run_test(t, d, &st, seed)?,
                });
            }
        }
    }
    Ok(rows)
}

fn test_battery(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rows = battery_rows(cfg)?;
    let text = match cfg.format {
        Format::Json => {
            let mut summary = Vec::new();
            for row in rows.iter().filter(|r| r.replicate == 0) {
                let same: Vec<&BatteryRow> = rows
                    .iter()
                    .filter(|o| o.dist == row.dist && o.result.test == row.result.test)
                    .collect();
                let rejected = same.iter().filter(|o| o.result.rejected()).count();
                summary.push(json!({
                    "dist": row.dist,
                    "test": row.result.test,
                    "replicates": same.len(),
                    "rejections": rejected,
                    "rate": rejected as f64 / same.len() as f64,
                }));
            }
            json_text(cfg, json!({"results": rows, "summary": summary}))?
        }
        Format::Csv => {
            let mut header = vec!["dist", "seed"];
            header.extend(TestResult::CSV_HEADER);
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut rec = vec![r.dist.label(), r.result.seed.to_string()];
                    rec.extend(r.result.csv_record());
                    rec
                })
                .collect();
            csv_text(cfg, &[], &header, &body)?
        }
    };
    Ok(Outcome { text, expected: true })
}

fn write_output(cfg: &ExperimentConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = resolve(&cli.command).and_then(|cfg| {
        let outcome = execute(&cfg)?;
        write_output(&cfg, &outcome.text)?;
        Ok(outcome)
    });
    match result {
        Ok(o) if o.expected => EXIT_OK,
        Ok(_) => {
            eprintln!("warning: outcome contradicts the distribution family; see the report");
            EXIT_NUMERIC
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERIC
            }
        }
    }
}
