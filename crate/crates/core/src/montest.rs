//! Bootstrap test for a nonincreasing regression function.
//!
//! The statistic compares the smoothed Grenander estimator (monotone by
//! construction) with the boundary-corrected kernel estimator (unconstrained).
//! Large distances speak against monotonicity. Critical values come from
//! resampling around the monotone fit with Gaussian noise whose scale is
//! estimated from first differences.

use std::ops::Range;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_bandwidth, Error, Result};
use crate::estimators::{KernelSmoother, SmoothedGrenander};
use crate::func::MonotoneFunction;
use crate::kernel::KernelSpec;
use crate::model::{cumulative_step, simulate_regression, ModelKind, Sample};
use crate::{quad, rng};

/// Norm used to compare the two estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestNorm {
    /// `n^{2/3} (int_b^{1-b} |SG - kernel|^2)^{1/2}`.
    #[default]
    L2,
    /// `n^{2/3} int_0^1 |SG - kernel|`; boundary regions are harmless for `p = 1`.
    L1,
}

/// Tuning of [`bootstrap_test`]. Defaults: `b = 0.1`, `B = 200`, `alpha = 0.05`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub b: f64,
    pub bootstrap: usize,
    pub alpha: f64,
    pub norm: TestNorm,
    /// Odd number of Simpson nodes for the distance integral.
    pub grid: usize,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            b: 0.1,
            bootstrap: 200,
            alpha: 0.05,
            norm: TestNorm::L2,
            grid: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub tn: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub bootstrap: usize,
    pub seed: u64,
    pub sigma_hat: f64,
}

/// `sqrt(sum (Y_{i+1} - Y_i)^2 / (2(n-1)))`.
pub fn rice_sigma(sample: &Sample) -> Result<f64> {
    let ys = &sample.ys;
    if ys.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "noise estimate needs n >= 2, got {}",
            ys.len()
        )));
    }
    let ss: f64 = ys.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((ss / (2.0 * (ys.len() - 1) as f64)).sqrt())
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 3 || grid.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "grid needs an odd node count >= 3, got {grid}"
        )));
    }
    Ok(())
}

/// The test statistic `T_n` for a regression sample.
pub fn statistic_tn(sample: &Sample, b: f64, kernel: &KernelSpec, grid: usize, norm: TestNorm) -> Result<f64> {
    check_bandwidth(b)?;
    check_grid(grid)?;
    let cumul = cumulative_step(sample, ModelKind::Regression)?;
    let sg = SmoothedGrenander::new(&cumul, kernel, b)?;
    let ks = KernelSmoother::new(&cumul, kernel, b)?;
    let scale = (sample.n as f64).powf(2.0 / 3.0);
    let (lo, hi) = match norm {
        TestNorm::L2 => (b, 1.0 - b),
        TestNorm::L1 => (0.0, 1.0),
    };
    let integral = quad::simpson(
        |t| {
            let d = (sg.eval(t) - ks.corrected(t)).abs();
            match norm {
                TestNorm::L2 => d * d,
                TestNorm::L1 => d,
            }
        },
        lo,
        hi,
        grid,
    );
    Ok(match norm {
        TestNorm::L2 => scale * integral.sqrt(),
        TestNorm::L1 => scale * integral,
    })
}

fn check_bootstrap(bootstrap: usize, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::out_of_range("alpha", alpha, "(0, 1)"));
    }
    if bootstrap < 20 {
        return Err(Error::InvalidArgument(format!("need B >= 20, got {bootstrap}")));
    }
    // at least one bootstrap statistic must lie above the critical value
    if alpha * (bootstrap as f64) < 1.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!("B = {bootstrap} too small for alpha = {alpha}")));
    }
    Ok(())
}

/// The `ceil((1 - alpha) B)`-th smallest of the bootstrap statistics.
pub fn critical_value(stats: &[f64], alpha: f64) -> Result<f64> {
    check_bootstrap(stats.len(), alpha)?;
    let mut sorted = stats.to_vec();
    sorted.sort_by(f64::total_cmp);
    // tiny slack keeps e.g. (1 - 0.05) * 200 from rounding up to 191
    let k = ((1.0 - alpha) * stats.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[k - 1])
}

/// Bootstrap statistics `T_n^*` around the monotone fit of `sample`, plus
/// the estimated noise scale.
pub fn bootstrap_statistics(
    sample: &Sample,
    kernel: &KernelSpec,
    cfg: &TestConfig,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    check_bandwidth(cfg.b)?;
    check_bootstrap(cfg.bootstrap, cfg.alpha)?;
    let cumul = cumulative_step(sample, ModelKind::Regression)?;
    let fit: Vec<f64> = {
        let sg = SmoothedGrenander::new(&cumul, kernel, cfg.b)?;
        sample.xs.iter().map(|&x| sg.eval(x)).collect()
    };
    let sigma = rice_sigma(sample)?;
    let stats = (0..cfg.bootstrap as u64)
        .into_par_iter()
        .map(|j| {
            let mut r = rng::stream(seed, &[j]);
            let ys = fit
                .iter()
                .map(|m| {
                    let e: f64 = StandardNormal.sample(&mut r);
                    m + sigma * e
                })
                .collect();
            statistic_tn(&Sample::from_responses(ys, None)?, cfg.b, kernel, cfg.grid, cfg.norm)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((stats, sigma))
}

pub fn bootstrap_test(sample: &Sample, kernel: &KernelSpec, cfg: &TestConfig, seed: u64) -> Result<TestOutcome> {
    let (stats, sigma_hat) = bootstrap_statistics(sample, kernel, cfg, seed)?;
    let tn = statistic_tn(sample, cfg.b, kernel, cfg.grid, cfg.norm)?;
    let c = critical_value(&stats, cfg.alpha)?;
    Ok(TestOutcome {
        tn,
        critical_value: c,
        alpha: cfg.alpha,
        reject: tn > c,
        bootstrap: cfg.bootstrap,
        seed,
        sigma_hat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub function: String,
    pub n: usize,
    pub sigma: f64,
    pub config: TestConfig,
    pub seed: u64,
    pub trials: usize,
    pub rejection_rate: f64,
    pub outcomes: Vec<TestOutcome>,
}

/// Trials `range` of a power study: trial `i` draws its sample from
/// `(seed, i, 0)` and bootstraps from `(seed, i, 1)`.
pub fn power_trials(
    lambda: &MonotoneFunction,
    n: usize,
    sigma: f64,
    kernel: &KernelSpec,
    cfg: &TestConfig,
    seed: u64,
    range: Range<u64>,
) -> Result<Vec<TestOutcome>> {
    range
        .into_par_iter()
        .map(|i| {
            let sample = simulate_regression(lambda, n, sigma, rng::derive_seed(seed, &[i, 0]))?;
            bootstrap_test(&sample, kernel, cfg, rng::derive_seed(seed, &[i, 1]))
        })
        .collect()
}

/// Fraction of `trials` simulated data sets on which the test rejects.
pub fn power_study(
    lambda: &MonotoneFunction,
    n: usize,
    sigma: f64,
    kernel: &KernelSpec,
    cfg: &TestConfig,
    trials: usize,
    seed: u64,
) -> Result<PowerReport> {
    if trials == 0 {
        return Err(Error::NoReplications);
    }
    let outcomes = power_trials(lambda, n, sigma, kernel, cfg, seed, 0..trials as u64)?;
    let rejected = outcomes.iter().filter(|o| o.reject).count();
    Ok(PowerReport {
        function: lambda.id().to_string(),
        n,
        sigma,
        config: cfg.clone(),
        seed,
        trials,
        rejection_rate: rejected as f64 / trials as f64,
        outcomes,
    })
}
