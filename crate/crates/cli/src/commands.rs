use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use smoothiso::asympt::{self, Centering, Regime};
use smoothiso::func::uniform_grid;
use smoothiso::mc::{self, BandwidthRule, EstimatorKind};
use smoothiso::montest::{self, TestConfig, TestNorm};
use smoothiso::scenario::{self, Scenario, ScenarioInfo};
use smoothiso::{builtin_function, io as sio, loss, KernelSpec, ModelKind, SampledFunction};

use crate::config::{resolve, ConfigError};

/// Settings shared by every subcommand.
pub struct Session {
    pub file: Option<Map<String, Value>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub enum Outcome {
    Done,
    Reject,
}

impl Session {
    fn config<C, F>(&self, name: &str, flags: &F) -> Result<C>
    where
        C: Serialize + for<'de> Deserialize<'de> + Default,
        F: Serialize,
    {
        let cfg: C = resolve(self.file.as_ref(), flags)?;
        log_config(name, &cfg);
        Ok(cfg)
    }

    /// The master seed: flag, then config, then a fresh one (printed).
    fn seed(&self, configured: &mut Option<u64>) -> u64 {
        let seed = self.seed.or(*configured).unwrap_or_else(|| {
            let s: u64 = rand::random();
            eprintln!("no seed given; using seed {s}");
            s
        });
        *configured = Some(seed);
        eprintln!("seed: {seed}");
        seed
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(io::BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn log_config<C: Serialize>(name: &str, cfg: &C) {
    let json = serde_json::to_string(cfg).unwrap_or_else(|e| format!("<{e}>"));
    eprintln!("{name} config: {json}");
}

fn rule_of(b: Option<f64>, c: f64, exponent: f64) -> BandwidthRule {
    match b {
        Some(b) => BandwidthRule::Fixed { b },
        None => BandwidthRule::Power { c, exponent },
    }
}

fn load_scenario(name: &str, sigma: Option<f64>, a: Option<f64>, kernel: &str, rule: BandwidthRule) -> Result<Scenario> {
    let mut params = HashMap::new();
    if let Some(s) = sigma {
        params.insert("sigma".to_string(), s);
    }
    if let Some(a) = a {
        params.insert("a".to_string(), a);
    }
    Ok(scenario::scenario(name, &params)?
        .with_kernel(KernelSpec::by_name(kernel)?)
        .with_rule(rule))
}

fn read_sample(path: &Path) -> Result<smoothiso::Sample> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(sio::read_sample(BufReader::new(f))?)
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Args, Serialize)]
pub struct EstimateFlags {
    /// Sample CSV (`x,y`); simulated from the scenario when absent.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<String>,
    /// `regression` or `density`, for `--in` samples.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// kernel | kernel_corrected | sg | gs
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    #[serde(rename = "in")]
    pub input: Option<String>,
    pub kind: ModelKind,
    pub scenario: String,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub n: usize,
    pub method: EstimatorKind,
    pub b: Option<f64>,
    pub bw_c: f64,
    pub bw_exponent: f64,
    pub grid: usize,
    pub kernel: String,
    pub gamma: f64,
    pub seed: Option<u64>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            input: None,
            kind: ModelKind::Regression,
            scenario: "linear-regression".into(),
            sigma: None,
            a: None,
            n: 1000,
            method: EstimatorKind::Sg,
            b: None,
            bw_c: 1.0,
            bw_exponent: 0.2,
            grid: 513,
            kernel: "triweight".into(),
            gamma: 0.8,
            seed: None,
        }
    }
}

pub fn estimate(ctx: &Session, flags: &EstimateFlags) -> Result<Outcome> {
    let mut cfg: EstimateConfig = ctx.config("estimate", flags)?;
    let rule = rule_of(cfg.b, cfg.bw_c, cfg.bw_exponent);
    let kernel = KernelSpec::by_name(&cfg.kernel)?;
    let (sample, kind) = match &cfg.input {
        Some(path) => (read_sample(Path::new(path))?, cfg.kind),
        None => {
            let sc = load_scenario(&cfg.scenario, cfg.sigma, cfg.a, &cfg.kernel, rule)?;
            let seed = ctx.seed(&mut cfg.seed);
            (sc.model.simulate(cfg.n, seed)?, sc.model.kind)
        }
    };
    let b = rule.bandwidth(sample.n);
    let cumul = smoothiso::model::cumulative_step(&sample, kind)?;
    let (lo, hi) = match cfg.method {
        EstimatorKind::Kernel => (b, 1.0 - b),
        _ => (0.0, 1.0),
    };
    if cfg.grid < 2 {
        return Err(ConfigError(format!("grid needs at least 2 points, got {}", cfg.grid)).into());
    }
    let grid = uniform_grid(lo, hi, cfg.grid);
    let values = cfg.method.evaluate(&cumul, &kernel, b, cfg.gamma, &grid)?;
    let est = SampledFunction::new(grid, values)?;
    let mut w = ctx.writer()?;
    sio::write_estimate(&est, &mut w)?;
    w.flush()?;
    Ok(Outcome::Done)
}

// ------------------------------------------------------------------ errors

#[derive(Debug, Args, Serialize)]
pub struct ErrorsFlags {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorsConfig {
    pub scenario: String,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub n: usize,
    pub p: f64,
    pub b: Option<f64>,
    pub bw_c: f64,
    pub bw_exponent: f64,
    pub kernel: String,
    pub gamma: f64,
    pub seed: Option<u64>,
}

impl Default for ErrorsConfig {
    fn default() -> Self {
        ErrorsConfig {
            scenario: "linear-regression".into(),
            sigma: None,
            a: None,
            n: 1000,
            p: 2.0,
            b: None,
            bw_c: 1.0,
            bw_exponent: 0.2,
            kernel: "triweight".into(),
            gamma: 0.8,
            seed: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct EstimatorErrors {
    kernel: f64,
    kernel_corrected: f64,
    sg: f64,
    gs: f64,
}

#[derive(Debug, Serialize)]
struct ErrorsReport {
    scenario: ScenarioInfo,
    n: usize,
    b: f64,
    p: f64,
    seed: u64,
    lp_errors: EstimatorErrors,
    /// Density scenarios only: Hellinger distances of the estimators defined on `[0, 1]`.
    hellinger: Option<BTreeMap<String, f64>>,
}

pub fn errors(ctx: &Session, flags: &ErrorsFlags) -> Result<Outcome> {
    let mut cfg: ErrorsConfig = ctx.config("errors", flags)?;
    let sc = load_scenario(&cfg.scenario, cfg.sigma, cfg.a, &cfg.kernel, rule_of(cfg.b, cfg.bw_c, cfg.bw_exponent))?;
    let seed = ctx.seed(&mut cfg.seed);
    let sample = sc.model.simulate(cfg.n, seed)?;
    let cumul = sc.model.cumulative(&sample)?;
    let b = sc.rule.bandwidth(cfg.n);
    let error_of = |kind: EstimatorKind| -> Result<f64> {
        let iv = kind.interval(b, cfg.gamma);
        let nodes = loss::loss_nodes(iv.0, iv.1)?;
        let est = kind.evaluate(&cumul, &sc.kernel, b, cfg.gamma, &nodes)?;
        let diff: Vec<f64> = est.iter().zip(&nodes).map(|(e, &t)| e - sc.model.lambda.eval(t)).collect();
        Ok(loss::lp_error_on_nodes(&diff, cfg.p, &sc.weight, iv)?)
    };
    let lp_errors = EstimatorErrors {
        kernel: error_of(EstimatorKind::Kernel)?,
        kernel_corrected: error_of(EstimatorKind::KernelCorrected)?,
        sg: error_of(EstimatorKind::Sg)?,
        gs: error_of(EstimatorKind::Gs)?,
    };
    let hellinger = if sc.model.kind == ModelKind::Density {
        let nodes = loss::loss_nodes(0.0, 1.0)?;
        let truth: Vec<f64> = nodes.iter().map(|&t| sc.model.lambda.eval(t)).collect();
        let mut out = BTreeMap::new();
        for (name, kind) in [("kernel_corrected", EstimatorKind::KernelCorrected), ("sg", EstimatorKind::Sg)] {
            let est = kind.evaluate(&cumul, &sc.kernel, b, cfg.gamma, &nodes)?;
            match loss::hellinger_on_nodes(&est, &truth, &sc.weight) {
                Ok(h) => {
                    out.insert(name.to_string(), h);
                }
                Err(e) => eprintln!("hellinger for {name} skipped: {e}"),
            }
        }
        Some(out)
    } else {
        None
    };
    ctx.emit_json(&ErrorsReport {
        scenario: sc.info(),
        n: cfg.n,
        b,
        p: cfg.p,
        seed,
        lp_errors,
        hellinger,
    })?;
    Ok(Outcome::Done)
}

// --------------------------------------------------------------- constants

#[derive(Debug, Args, Serialize)]
pub struct ConstantsFlags {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub kernel: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub scenario: String,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub p: f64,
    pub n: usize,
    pub b: Option<f64>,
    pub bw_c: f64,
    pub bw_exponent: f64,
    pub kernel: String,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            scenario: "linear-regression".into(),
            sigma: None,
            a: None,
            p: 2.0,
            n: 1000,
            b: None,
            bw_c: 1.0,
            bw_exponent: 0.2,
            kernel: "triweight".into(),
        }
    }
}

#[derive(Debug, Serialize)]
struct ConstantsReport {
    scenario: String,
    p: f64,
    n: usize,
    b: f64,
    regime: Regime,
    c0: f64,
    sigma1: f64,
    #[serde(rename = "Dsq")]
    dsq: f64,
    m_n: f64,
    m_c: f64,
    m_limit: f64,
    m_boundary: f64,
    sigma2: f64,
    theta2: f64,
    theta1: f64,
    theta_tilde2: f64,
    /// `null` when `c1` is undefined for the target.
    alpha0: Option<f64>,
}

pub fn constants(ctx: &Session, flags: &ConstantsFlags) -> Result<Outcome> {
    let cfg: ConstantsConfig = ctx.config("constants", flags)?;
    let rule = rule_of(cfg.b, cfg.bw_c, cfg.bw_exponent);
    let sc = load_scenario(&cfg.scenario, cfg.sigma, cfg.a, &cfg.kernel, rule)?;
    let (m, w, k, p, n) = (&sc.model, &sc.weight, &sc.kernel, cfg.p, cfg.n);
    let b = rule.bandwidth(n);
    let center = |c| asympt::centering_constant(m, w, k, p, n, b, c);
    let c0 = asympt::c0_of(n, b);
    let theta = asympt::variance_theta(m, w, k, p, c0)?;
    let alpha0 = match asympt::alpha0(m, w, p) {
        Ok(a) => Some(a),
        Err(e) => {
            eprintln!("alpha0 unavailable: {e}");
            None
        }
    };
    ctx.emit_json(&ConstantsReport {
        scenario: sc.name.clone(),
        p,
        n,
        b,
        regime: rule.regime(),
        c0,
        sigma1: asympt::sigma1(k, p)?,
        dsq: k.dsq(),
        m_n: center(Centering::Full)?,
        m_c: center(Centering::Truncated)?,
        m_limit: center(Centering::Limit)?,
        m_boundary: center(Centering::Boundary)?,
        sigma2: asympt::variance_sigma2(m, w, k, p)?,
        theta2: theta.theta2,
        theta1: theta.theta1,
        theta_tilde2: theta.theta_tilde2,
        alpha0,
    })?;
    Ok(Outcome::Done)
}

// --------------------------------------------------------------------- clt

#[derive(Debug, Args, Serialize)]
pub struct CltFlags {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    /// kernel | kernel_corrected | sg | gs
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Bandwidth rule `b = bw_c n^{-bw_exponent}` (ignored with `--b`).
    #[arg(long)]
    pub bw_exponent: Option<f64>,
    #[arg(long = "M")]
    #[serde(rename = "replications")]
    pub replications: Option<usize>,
    /// full | truncated | limit | boundary
    #[arg(long)]
    pub centering: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Also write the z-values as a one-column CSV.
    #[arg(long)]
    pub z_out: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CltCmdConfig {
    pub scenario: String,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub estimator: EstimatorKind,
    pub p: f64,
    pub n: usize,
    pub b: Option<f64>,
    pub bw_c: f64,
    pub bw_exponent: f64,
    pub replications: usize,
    pub centering: Option<Centering>,
    pub gamma: f64,
    pub kernel: String,
    pub seed: Option<u64>,
    pub z_out: Option<String>,
}

impl Default for CltCmdConfig {
    fn default() -> Self {
        CltCmdConfig {
            scenario: "linear-regression".into(),
            sigma: None,
            a: None,
            estimator: EstimatorKind::KernelCorrected,
            p: 2.0,
            n: 1000,
            b: None,
            bw_c: 1.0,
            bw_exponent: 0.2,
            replications: 200,
            centering: None,
            gamma: 0.8,
            kernel: "triweight".into(),
            seed: None,
            z_out: None,
        }
    }
}

pub fn clt(ctx: &Session, flags: &CltFlags) -> Result<Outcome> {
    let mut cfg: CltCmdConfig = ctx.config("clt", flags)?;
    let rule = rule_of(cfg.b, cfg.bw_c, cfg.bw_exponent);
    let sc = load_scenario(&cfg.scenario, cfg.sigma, cfg.a, &cfg.kernel, rule)?;
    let seed = ctx.seed(&mut cfg.seed);
    let report = mc::clt_experiment(
        &sc.model,
        &sc.weight,
        &sc.kernel,
        &mc::CltConfig {
            estimator: cfg.estimator,
            p: cfg.p,
            n: cfg.n,
            bandwidth: rule,
            replications: cfg.replications,
            seed,
            centering: cfg.centering,
            gamma: cfg.gamma,
        },
    )?;
    eprintln!(
        "mean {:.4}  variance {:.4}  ks {:.4}",
        report.mean, report.variance, report.ks_distance
    );
    if let Some(path) = &cfg.z_out {
        let f = File::create(path).with_context(|| format!("cannot create {path}"))?;
        sio::write_column("z", &report.z_values, io::BufWriter::new(f))?;
    }
    ctx.emit_json(&report)?;
    Ok(Outcome::Done)
}

// ------------------------------------------------------------------ sgdist

#[derive(Debug, Args, Serialize)]
pub struct SgdistFlags {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long = "M")]
    #[serde(rename = "replications")]
    pub replications: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgdistConfig {
    pub scenario: String,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub p: f64,
    pub n: usize,
    pub b: Option<f64>,
    pub bw_c: f64,
    pub bw_exponent: f64,
    pub replications: usize,
    pub kernel: String,
    pub seed: Option<u64>,
}

impl Default for SgdistConfig {
    fn default() -> Self {
        SgdistConfig {
            scenario: "quadratic-regression".into(),
            sigma: None,
            a: None,
            p: 2.0,
            n: 1000,
            b: None,
            bw_c: 1.0,
            bw_exponent: 0.2,
            replications: 100,
            kernel: "triweight".into(),
            seed: None,
        }
    }
}

pub fn sgdist(ctx: &Session, flags: &SgdistFlags) -> Result<Outcome> {
    let mut cfg: SgdistConfig = ctx.config("sgdist", flags)?;
    let rule = rule_of(cfg.b, cfg.bw_c, cfg.bw_exponent);
    let sc = load_scenario(&cfg.scenario, cfg.sigma, cfg.a, &cfg.kernel, rule)?;
    let seed = ctx.seed(&mut cfg.seed);
    let report = mc::sg_vs_kernel_experiment(
        &sc.model,
        &sc.weight,
        &sc.kernel,
        cfg.p,
        cfg.n,
        rule.bandwidth(cfg.n),
        cfg.replications,
        seed,
    )?;
    eprintln!("median {:.5}  qq correlation {:.4}", report.median, report.qq_correlation);
    ctx.emit_json(&report)?;
    Ok(Outcome::Done)
}

// ---------------------------------------------------------------- boundary

#[derive(Debug, Args, Serialize)]
pub struct BoundaryFlags {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<usize>>,
    #[arg(long = "M")]
    #[serde(rename = "replications")]
    pub replications: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    pub scenario: String,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub p: f64,
    pub ladder: Vec<usize>,
    pub b: Option<f64>,
    pub bw_c: f64,
    pub bw_exponent: f64,
    pub replications: usize,
    pub kernel: String,
    pub seed: Option<u64>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            scenario: "lambda-a-regression".into(),
            sigma: None,
            a: None,
            p: 1.0,
            ladder: vec![1000, 10_000, 100_000],
            b: None,
            bw_c: 1.0,
            bw_exponent: 0.2,
            replications: 100,
            kernel: "triweight".into(),
            seed: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct BoundaryReport {
    scenario: ScenarioInfo,
    p: f64,
    replications: usize,
    seed: u64,
    rows: Vec<mc::BlowupRow>,
}

pub fn boundary(ctx: &Session, flags: &BoundaryFlags) -> Result<Outcome> {
    let mut cfg: BoundaryConfig = ctx.config("boundary", flags)?;
    let rule = rule_of(cfg.b, cfg.bw_c, cfg.bw_exponent);
    let sc = load_scenario(&cfg.scenario, cfg.sigma, cfg.a, &cfg.kernel, rule)?;
    let seed = ctx.seed(&mut cfg.seed);
    let rows = mc::boundary_blowup_experiment(
        &sc.model,
        &sc.weight,
        &sc.kernel,
        cfg.p,
        &cfg.ladder,
        rule,
        cfg.replications,
        seed,
    )?;
    ctx.emit_json(&BoundaryReport {
        scenario: sc.info(),
        p: cfg.p,
        replications: cfg.replications,
        seed,
        rows,
    })?;
    Ok(Outcome::Done)
}

// ---------------------------------------------------------------- chernoff

#[derive(Debug, Args, Serialize)]
pub struct ChernoffFlags {
    /// Half-width of the simulation window.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long = "M")]
    #[serde(rename = "replications")]
    pub replications: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChernoffConfig {
    pub c: f64,
    pub step: f64,
    pub replications: usize,
    pub seed: Option<u64>,
}

impl Default for ChernoffConfig {
    fn default() -> Self {
        ChernoffConfig {
            c: 4.0,
            step: 5e-4,
            replications: 10_000,
            seed: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct ChernoffReport {
    seed: u64,
    mean: f64,
    std_error: f64,
    #[serde(flatten)]
    sample: mc::ChernoffGapSample,
}

pub fn chernoff(ctx: &Session, flags: &ChernoffFlags) -> Result<Outcome> {
    let mut cfg: ChernoffConfig = ctx.config("chernoff", flags)?;
    let seed = ctx.seed(&mut cfg.seed);
    let sample = mc::chernoff_gap_sample(cfg.c, cfg.step, cfg.replications, seed)?;
    let (mean, var) = mc::mean_variance(&sample.draws);
    let std_error = (var / sample.draws.len() as f64).sqrt();
    eprintln!("mean {mean:.5} (se {std_error:.5})");
    ctx.emit_json(&ChernoffReport {
        seed,
        mean,
        std_error,
        sample,
    })?;
    Ok(Outcome::Done)
}

// -------------------------------------------------------------------- test

#[derive(Debug, Args, Serialize)]
pub struct TestFlags {
    /// Regression sample CSV (`x,y`).
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<String>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long = "B")]
    #[serde(rename = "bootstrap")]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// 1 (whole interval) or 2 (interior).
    #[arg(long)]
    pub p: Option<u8>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestCmdConfig {
    #[serde(rename = "in")]
    pub input: Option<String>,
    pub b: f64,
    pub bootstrap: usize,
    pub alpha: f64,
    pub p: u8,
    pub grid: usize,
    pub kernel: String,
    pub seed: Option<u64>,
}

impl Default for TestCmdConfig {
    fn default() -> Self {
        let d = TestConfig::default();
        TestCmdConfig {
            input: None,
            b: d.b,
            bootstrap: d.bootstrap,
            alpha: d.alpha,
            p: 2,
            grid: d.grid,
            kernel: "triweight".into(),
            seed: None,
        }
    }
}

fn norm_of(p: u8) -> Result<TestNorm> {
    match p {
        1 => Ok(TestNorm::L1),
        2 => Ok(TestNorm::L2),
        other => Err(ConfigError(format!("p must be 1 or 2, got {other}")).into()),
    }
}

pub fn test(ctx: &Session, flags: &TestFlags) -> Result<Outcome> {
    let mut cfg: TestCmdConfig = ctx.config("test", flags)?;
    let Some(input) = cfg.input.clone() else {
        return Err(ConfigError("`in` (sample CSV) is required".into()).into());
    };
    let test_cfg = TestConfig {
        b: cfg.b,
        bootstrap: cfg.bootstrap,
        alpha: cfg.alpha,
        norm: norm_of(cfg.p)?,
        grid: cfg.grid,
    };
    let kernel = KernelSpec::by_name(&cfg.kernel)?;
    let seed = ctx.seed(&mut cfg.seed);
    let sample = read_sample(Path::new(&input))?;
    let outcome = montest::bootstrap_test(&sample, &kernel, &test_cfg, seed)?;
    ctx.emit_json(&outcome)?;
    Ok(if outcome.reject { Outcome::Reject } else { Outcome::Done })
}

// ------------------------------------------------------------------- power

#[derive(Debug, Args, Serialize)]
pub struct PowerFlags {
    /// Regression function id (e.g. lambda_a, lambda1 ... lambda7).
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "trials")]
    pub trials: Option<usize>,
    #[arg(long = "B")]
    #[serde(rename = "bootstrap")]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub p: Option<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    #[serde(rename = "fn")]
    pub function: String,
    pub a: Option<f64>,
    pub sigma: f64,
    pub n: usize,
    pub trials: usize,
    pub bootstrap: usize,
    pub alpha: f64,
    pub b: f64,
    pub p: u8,
    pub grid: usize,
    pub kernel: String,
    pub seed: Option<u64>,
}

impl Default for PowerConfig {
    fn default() -> Self {
        let d = TestConfig::default();
        PowerConfig {
            function: "lambda_a".into(),
            a: None,
            sigma: 0.1,
            n: 100,
            trials: 200,
            bootstrap: d.bootstrap,
            alpha: d.alpha,
            b: d.b,
            p: 2,
            grid: d.grid,
            kernel: "triweight".into(),
            seed: None,
        }
    }
}

pub fn power(ctx: &Session, flags: &PowerFlags) -> Result<Outcome> {
    let mut cfg: PowerConfig = ctx.config("power", flags)?;
    let mut params = HashMap::new();
    params.insert("sigma".to_string(), cfg.sigma);
    if let Some(a) = cfg.a {
        params.insert("a".to_string(), a);
    }
    let lambda = builtin_function(&cfg.function, &params)?;
    let test_cfg = TestConfig {
        b: cfg.b,
        bootstrap: cfg.bootstrap,
        alpha: cfg.alpha,
        norm: norm_of(cfg.p)?,
        grid: cfg.grid,
    };
    let kernel = KernelSpec::by_name(&cfg.kernel)?;
    let seed = ctx.seed(&mut cfg.seed);
    if cfg.trials == 0 {
        bail!("no trials requested");
    }
    let report = montest::power_study(&lambda, cfg.n, cfg.sigma, &kernel, &test_cfg, cfg.trials, seed)?;
    let a = cfg.a.map(|a| a.to_string()).unwrap_or_default();
    let mut w = ctx.writer()?;
    writeln!(w, "function,a,sigma,n,b,alpha,B,N,p,seed,rejection_rate")?;
    writeln!(
        w,
        "{},{a},{},{},{},{},{},{},{},{seed},{}",
        cfg.function, cfg.sigma, cfg.n, cfg.b, cfg.alpha, cfg.bootstrap, cfg.trials, cfg.p, report.rejection_rate
    )?;
    w.flush()?;
    Ok(Outcome::Done)
}
