//! Statistical models, synthetic data, and cumulative step estimators.

use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Continuity, MonotoneFunction, StepFunction};
use crate::quad;
use crate::rng;

/// Observations on the design `x_i = i/n`.
///
/// For the regression model `ys` are responses; for the density model they
/// are the sorted draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub sigma_true: Option<f64>,
}

impl Sample {
    /// Wrap responses observed at `i/n`.
    pub fn from_responses(ys: Vec<f64>, sigma_true: Option<f64>) -> Result<Self> {
        let n = ys.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("sample needs n >= 2, got {n}")));
        }
        Ok(Sample {
            n,
            xs: design(n),
            ys,
            sigma_true,
        })
    }
}

/// `(1/n, 2/n, ..., 1)`.
pub fn design(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Regression,
    Density,
}

/// Gaussian process approximating the centred cumulative process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Embedding {
    BrownianMotion,
    BrownianBridge,
}

/// The time change `L` of the embedding together with `L'` and `L''`.
#[derive(Debug, Clone)]
enum TimeChange {
    /// `L(t) = c t`.
    Linear(f64),
    /// `L = Lambda`, the true cumulative.
    Cumulative(MonotoneFunction),
}

/// A statistical model: the target, the noise level, and the embedding.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lambda: MonotoneFunction,
    pub sigma: f64,
    pub embedding: Embedding,
    time_change: TimeChange,
    /// `+inf` for Gaussian regression.
    pub q_exponent: f64,
}

impl ModelSpec {
    /// `Y_i = lambda(i/n) + eps_i` with Gaussian noise, embedded in a Brownian
    /// motion with `L(t) = sigma^2 t`.
    pub fn regression(lambda: MonotoneFunction, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::out_of_range("sigma", sigma, "(0, inf)"));
        }
        Ok(ModelSpec {
            kind: ModelKind::Regression,
            lambda,
            sigma,
            embedding: Embedding::BrownianMotion,
            time_change: TimeChange::Linear(sigma * sigma),
            q_exponent: f64::INFINITY,
        })
    }

    /// Monotone density on `[0, 1]`; the empirical process is embedded in a
    /// Brownian bridge with `L = Lambda`.
    pub fn density(lambda: MonotoneFunction) -> Result<Self> {
        check_density(&lambda)?;
        Ok(ModelSpec {
            kind: ModelKind::Density,
            lambda: lambda.clone(),
            sigma: 0.0,
            embedding: Embedding::BrownianBridge,
            time_change: TimeChange::Cumulative(lambda),
            q_exponent: f64::INFINITY,
        })
    }

    pub fn big_l(&self, t: f64) -> f64 {
        match &self.time_change {
            TimeChange::Linear(c) => c * t,
            TimeChange::Cumulative(f) => quad::adaptive(|u| f.eval(u), 0.0, t, 1e-12),
        }
    }

    pub fn l_prime(&self, t: f64) -> f64 {
        match &self.time_change {
            TimeChange::Linear(c) => *c,
            TimeChange::Cumulative(f) => f.eval(t),
        }
    }

    pub fn l_second(&self, t: f64) -> f64 {
        match &self.time_change {
            TimeChange::Linear(_) => 0.0,
            TimeChange::Cumulative(f) => f.deriv1(t),
        }
    }

    /// `L' > 0` and finite on the 1001-point grid.
    pub fn l_prime_is_positive(&self) -> bool {
        (0..=1000).all(|i| {
            let v = self.l_prime(i as f64 / 1000.0);
            v > 0.0 && v.is_finite()
        })
    }

    /// Draw a sample of size `n` from this model.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Sample> {
        match self.kind {
            ModelKind::Regression => simulate_regression(&self.lambda, n, self.sigma, seed),
            ModelKind::Density => simulate_density(&self.lambda, n, seed),
        }
    }

    pub fn cumulative(&self, sample: &Sample) -> Result<StepFunction> {
        cumulative_step(sample, self.kind)
    }
}

fn check_density(lambda: &MonotoneFunction) -> Result<()> {
    if let Some(i) = (0..=1000).find(|&i| lambda.eval(i as f64 / 1000.0) < 0.0) {
        return Err(Error::NotADensity(format!(
            "negative at t = {}",
            i as f64 / 1000.0
        )));
    }
    let mass = quad::adaptive(|u| lambda.eval(u), 0.0, 1.0, 1e-12);
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::NotADensity(format!("total mass {mass}")));
    }
    Ok(())
}

/// `Y_i = lambda(i/n) + eps_i`, `eps_i ~ N(0, sigma^2)` i.i.d.
pub fn simulate_regression(
    lambda: &MonotoneFunction,
    n: usize,
    sigma: f64,
    seed: u64,
) -> Result<Sample> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::out_of_range("sigma", sigma, "[0, inf)"));
    }
    let mut rng = rng::stream(seed, &[]);
    let xs = design(n);
    let ys = xs
        .iter()
        .map(|&x| {
            let eps: f64 = StandardNormal.sample(&mut rng);
            lambda.eval(x) + sigma * eps
        })
        .collect();
    Ok(Sample {
        n,
        xs,
        ys,
        sigma_true: Some(sigma),
    })
}

/// Tabulated `Lambda` on a uniform mesh, refined inside a cell by an 8-node
/// Gauss-Legendre rule. Used to invert `Lambda` quickly.
struct CumulativeTable<'a> {
    lambda: &'a MonotoneFunction,
    cells: usize,
    table: Vec<f64>,
}

impl<'a> CumulativeTable<'a> {
    fn new(lambda: &'a MonotoneFunction, cells: usize) -> Self {
        let h = 1.0 / cells as f64;
        let rule = quad::legendre(8);
        let mut table = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for j in 0..cells {
            let a = j as f64 * h;
            acc += rule.integrate(a, a + h, |u| lambda.eval(u));
            table.push(acc);
        }
        CumulativeTable {
            lambda,
            cells,
            table,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let h = 1.0 / self.cells as f64;
        let j = ((t / h).floor() as usize).min(self.cells - 1);
        let a = j as f64 * h;
        self.table[j] + quad::legendre(8).integrate(a, t, |u| self.lambda.eval(u))
    }

    /// Smallest `x` with `Lambda(x) >= u`, by bisection to `1e-12`.
    fn invert(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `n` i.i.d. draws from the density `lambda` by inversion; returned sorted.
pub fn simulate_density(lambda: &MonotoneFunction, n: usize, seed: u64) -> Result<Sample> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    check_density(lambda)?;
    let table = CumulativeTable::new(lambda, 1024);
    let mut rng = rng::stream(seed, &[]);
    let unif = Uniform::new(0.0, 1.0).expect("valid range");
    let mut ys: Vec<f64> = (0..n)
        .map(|_| table.invert(unif.sample(&mut rng)))
        .collect();
    ys.sort_by(f64::total_cmp);
    Ok(Sample {
        n,
        xs: design(n),
        ys,
        sigma_true: None,
    })
}

/// The cumulative step estimator `Lambda_n`.
///
/// Regression: partial sums `n^{-1} sum_{i <= nt} Y_i`. Density: empirical
/// distribution function of the draws (ties merged into one jump).
pub fn cumulative_step(sample: &Sample, kind: ModelKind) -> Result<StepFunction> {
    let n = sample.n;
    if sample.ys.len() != n || n == 0 {
        return Err(Error::InvalidArgument("malformed sample".into()));
    }
    let inv_n = 1.0 / n as f64;
    match kind {
        ModelKind::Regression => {
            let mut acc = 0.0;
            let values = sample
                .ys
                .iter()
                .map(|y| {
                    acc += y;
                    acc * inv_n
                })
                .collect();
            StepFunction::new(sample.xs.clone(), values, 0.0, Continuity::Right)
        }
        ModelKind::Density => {
            let mut breakpoints: Vec<f64> = Vec::with_capacity(n);
            let mut values: Vec<f64> = Vec::with_capacity(n);
            for (i, &y) in sample.ys.iter().enumerate() {
                if !(0.0..=1.0).contains(&y) {
                    return Err(Error::InvalidArgument(format!("draw {y} outside [0, 1]")));
                }
                let v = (i + 1) as f64 * inv_n;
                match breakpoints.last() {
                    Some(&last) if last == y => *values.last_mut().unwrap() = v,
                    Some(&last) if last > y => return Err(Error::Unordered(i)),
                    _ => {
                        breakpoints.push(y);
                        values.push(v);
                    }
                }
            }
            StepFunction::new(breakpoints, values, 0.0, Continuity::Right)
        }
    }
}

/// `Lambda(t) = int_0^t lambda`, adaptive quadrature to `1e-10`.
pub fn true_cumulative(lambda: &MonotoneFunction, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::out_of_range("t", t, "[0, 1]"));
    }
    Ok(quad::adaptive(|u| lambda.eval(u), 0.0, t, 1e-10))
}
