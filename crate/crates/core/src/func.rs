//! Function representations: the analytic target, step and piecewise-linear
//! curves, evaluation grids, and weight measures.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form families with analytic first and second derivatives.
#[derive(Clone)]
enum Formula {
    /// `-(1+x) + a exp(-50 (x-1/2)^2)`.
    LambdaA { a: f64 },
    Lambda1,
    Lambda2 { sigma: f64 },
    /// `height * exp(-50 (x-1/2)^2) + slope * x`.
    Bump { height: f64, slope: f64 },
    /// `-0.1 cos(6 pi x) + slope * x`.
    Cosine { slope: f64 },
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
    /// `c + exp(-a x)`.
    ExpDecay { a: f64, c: f64 },
    Custom { f: RealFn, d1: RealFn, d2: RealFn },
}

/// Bump `h exp(-50 (x-1/2)^2)` and its first two derivatives.
fn bump(h: f64, x: f64) -> (f64, f64, f64) {
    let d = x - 0.5;
    let e = h * (-50.0 * d * d).exp();
    (e, -100.0 * d * e, (10_000.0 * d * d - 100.0) * e)
}

impl Formula {
    fn eval3(&self, x: f64) -> (f64, f64, f64) {
        match self {
            Formula::LambdaA { a } => {
                let (e, e1, e2) = bump(*a, x);
                (-(1.0 + x) + e, -1.0 + e1, e2)
            }
            Formula::Lambda1 => {
                let d = x - 0.5;
                let (c0, c1, c2) = if x <= 0.5 {
                    (-15.0 * d * d * d, -45.0 * d * d, -90.0 * d)
                } else {
                    (0.0, 0.0, 0.0)
                };
                let q = x - 0.25;
                let e = (-250.0 * q * q).exp();
                (
                    c0 - 0.3 * d + e,
                    c1 - 0.3 - 500.0 * q * e,
                    c2 + (250_000.0 * q * q - 500.0) * e,
                )
            }
            Formula::Lambda2 { sigma } => (16.0 * sigma * x, 16.0 * sigma, 0.0),
            Formula::Bump { height, slope } => {
                let (e, e1, e2) = bump(*height, x);
                (e + slope * x, e1 + slope, e2)
            }
            Formula::Cosine { slope } => {
                let w = 6.0 * std::f64::consts::PI;
                let (s, c) = (w * x).sin_cos();
                (-0.1 * c + slope * x, 0.1 * w * s + slope, 0.1 * w * w * c)
            }
            Formula::Polynomial(c) => {
                let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
                for cj in c.iter().rev() {
                    f2 = f2 * x + f1 * 2.0;
                    f1 = f1 * x + f;
                    f = f * x + cj;
                }
                (f, f1, f2)
            }
            Formula::ExpDecay { a, c } => {
                let e = (-a * x).exp();
                (c + e, -a * e, a * a * e)
            }
            Formula::Custom { f, d1, d2 } => (f(x), d1(x), d2(x)),
        }
    }
}

/// A twice differentiable function on `[0, 1]` together with its first two
/// derivatives. This is the ground truth of every experiment.
#[derive(Clone)]
pub struct MonotoneFunction {
    id: String,
    formula: Formula,
    decreasing: bool,
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFunction")
            .field("id", &self.id)
            .field("is_decreasing", &self.decreasing)
            .finish()
    }
}

impl MonotoneFunction {
    fn from_formula(id: impl Into<String>, formula: Formula) -> Self {
        let mut out = MonotoneFunction {
            id: id.into(),
            formula,
            decreasing: false,
        };
        out.decreasing = (0..=1000).all(|i| out.deriv1(i as f64 / 1000.0) < 0.0);
        out
    }

    /// `sum_j coeffs[j] x^j`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::from_formula("polynomial", Formula::Polynomial(coeffs))
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// A user-supplied function; derivatives must be supplied analytically.
    pub fn custom(
        id: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_formula(
            id,
            Formula::Custom {
                f: Arc::new(f),
                d1: Arc::new(d1),
                d2: Arc::new(d2),
            },
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.formula.eval3(t).0
    }

    #[inline]
    pub fn deriv1(&self, t: f64) -> f64 {
        self.formula.eval3(t).1
    }

    #[inline]
    pub fn deriv2(&self, t: f64) -> f64 {
        self.formula.eval3(t).2
    }

    /// True when the first derivative is negative on the 1001-point grid.
    pub fn is_decreasing(&self) -> bool {
        self.decreasing
    }
}

fn param(params: &HashMap<String, f64>, id: &str, key: &'static str) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| Error::MissingParameter {
        id: id.to_string(),
        param: key,
    })
}

fn param_or(params: &HashMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Names accepted by [`builtin_function`].
pub const BUILTIN_IDS: &[&str] = &[
    "lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "lambda6", "lambda7", "lambda_a",
    "linear", "quadratic", "expdec",
];

/// Test functions used in the power study plus a few decreasing shapes.
///
/// * `lambda_a` needs `a`; `lambda2` needs `sigma`.
/// * `linear`: `c - a x` (defaults `c = 0`, `a = 1`).
/// * `quadratic`: `c - x - a x^2 / 2` (defaults `c = 1`, `a = 1`).
/// * `expdec`: `c + exp(-a x)` (defaults `c = 0`, `a = 1`).
pub fn builtin_function(id: &str, params: &HashMap<String, f64>) -> Result<MonotoneFunction> {
    let formula = match id {
        "lambda_a" => Formula::LambdaA {
            a: param(params, id, "a")?,
        },
        "lambda1" => Formula::Lambda1,
        "lambda2" => Formula::Lambda2 {
            sigma: param(params, id, "sigma")?,
        },
        "lambda3" => Formula::Bump {
            height: 0.2,
            slope: 0.0,
        },
        "lambda4" => Formula::Cosine { slope: 0.0 },
        "lambda5" => Formula::Bump {
            height: 0.2,
            slope: -0.2,
        },
        "lambda6" => Formula::Cosine { slope: -0.2 },
        "lambda7" => Formula::LambdaA { a: 0.45 },
        "linear" => Formula::Polynomial(vec![
            param_or(params, "c", 0.0),
            -param_or(params, "a", 1.0),
        ]),
        "quadratic" => Formula::Polynomial(vec![
            param_or(params, "c", 1.0),
            -1.0,
            -0.5 * param_or(params, "a", 1.0),
        ]),
        "expdec" => Formula::ExpDecay {
            a: param_or(params, "a", 1.0),
            c: param_or(params, "c", 0.0),
        },
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(MonotoneFunction::from_formula(id, formula))
}

/// Whether a step function is right-continuous (cadlag cumulative estimators)
/// or left-continuous (left-hand slopes of a concave majorant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    Right,
    Left,
}

/// Piecewise-constant function on `[0, 1]`.
///
/// `values[j]` holds on the cell that starts at `breakpoints[j]`; `initial`
/// holds before the first breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    initial: f64,
    continuity: Continuity,
}

impl StepFunction {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        initial: f64,
        continuity: Continuity,
    ) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::Unordered(i + 1));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) || !initial.is_finite() {
            return Err(Error::InvalidArgument("non-finite step function".into()));
        }
        Ok(StepFunction {
            breakpoints,
            values,
            initial,
            continuity,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    /// Jump at breakpoint `j`.
    #[inline]
    pub fn jump(&self, j: usize) -> f64 {
        let prev = if j == 0 { self.initial } else { self.values[j - 1] };
        self.values[j] - prev
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = match self.continuity {
            Continuity::Right => self.breakpoints.partition_point(|&u| u <= t),
            Continuity::Left => self.breakpoints.partition_point(|&u| u < t),
        };
        if idx == 0 {
            self.initial
        } else {
            self.values[idx - 1]
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        (0..self.values.len()).all(|j| self.jump(j) >= 0.0)
    }

    pub fn is_nonincreasing(&self) -> bool {
        (0..self.values.len()).all(|j| self.jump(j) <= 0.0)
    }
}

/// Continuous piecewise-linear curve through `(knots[i], knot_values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    knot_values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, knot_values: Vec<f64>) -> Result<Self> {
        if knots.len() != knot_values.len() || knots.len() < 2 {
            return Err(Error::InvalidArgument(
                "piecewise-linear curve needs at least two knots with matching values".into(),
            ));
        }
        if let Some(i) = knots.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::Unordered(i + 1));
        }
        Ok(PiecewiseLinear { knots, knot_values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.knot_values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.knot_values.windows(2))
            .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
            .collect()
    }

    /// Linear interpolation; clamps to the end values outside the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.knot_values[0];
        }
        if t >= self.knots[n - 1] {
            return self.knot_values[n - 1];
        }
        let j = self.knots.partition_point(|&u| u <= t).max(1) - 1;
        let (t0, t1) = (self.knots[j], self.knots[j + 1]);
        let (v0, v1) = (self.knot_values[j], self.knot_values[j + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// A function sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidArgument("grid and values differ in length".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Nonincreasing up to an absolute slack.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Uniform grid of `n` points on `[a, b]` (both ends included).
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

/// Density `w` of the measure `dmu = w(t) dt` on `[0, 1]`.
#[derive(Clone)]
pub struct WeightMeasure {
    name: String,
    w: RealFn,
}

impl fmt::Debug for WeightMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightMeasure({})", self.name)
    }
}

impl WeightMeasure {
    pub fn uniform() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        assert!(c >= 0.0, "weight must be nonnegative");
        WeightMeasure {
            name: format!("constant({c})"),
            w: Arc::new(move |_| c),
        }
    }

    /// `t^{2p} (1-t)^{2p}`, which suppresses the boundary regions.
    pub fn boundary(p: f64) -> Self {
        WeightMeasure {
            name: format!("boundary(p={p})"),
            w: Arc::new(move |t: f64| {
                let t = t.clamp(0.0, 1.0);
                (t * (1.0 - t)).powf(2.0 * p)
            }),
        }
    }

    /// `w(t) / (4 lambda(t))`, the weight linking squared Hellinger and `L_2` losses.
    pub fn hellinger_adjusted(&self, lambda: &MonotoneFunction) -> Self {
        let inner = self.w.clone();
        let lambda = lambda.clone();
        WeightMeasure {
            name: format!("{}/(4*{})", self.name, lambda.id()),
            w: Arc::new(move |t| inner(t) / (4.0 * lambda.eval(t))),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        assert!(c >= 0.0, "weight must be nonnegative");
        let inner = self.w.clone();
        WeightMeasure {
            name: format!("{c}*{}", self.name),
            w: Arc::new(move |t| c * inner(t)),
        }
    }

    /// Caller guarantees `w >= 0` and continuity.
    pub fn custom(name: impl Into<String>, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        WeightMeasure {
            name: name.into(),
            w: Arc::new(w),
        }
    }

    pub fn by_name(name: &str, p: f64) -> Result<Self> {
        match name {
            "uniform" => Ok(Self::uniform()),
            "boundary" => Ok(Self::boundary(p)),
            other => Err(Error::InvalidArgument(format!("unknown weight `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.w)(t)
    }
}
