//! Python bindings for the smoothiso estimators, constants and experiments.
//!
//! Samples cross the boundary as plain lists: regression responses observed
//! at `i/n`, or the draws of a density sample. Structured results come back
//! as dicts.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;
use pythonize::{depythonize, pythonize};
use serde::de::DeserializeOwned;
use serde::Serialize;

use smoothiso::asympt::{self, AsymptoticConstants, Centering};
use smoothiso::estimators::{self, KernelSmoother};
use smoothiso::func::uniform_grid;
use smoothiso::mc::{self, BandwidthRule, CltConfig, EstimatorKind};
use smoothiso::model::{self, cumulative_step, design, ModelKind, Sample};
use smoothiso::montest::{self, TestConfig, TestNorm};
use smoothiso::scenario::{scenario, Scenario};
use smoothiso::{lcm, KernelSpec, MonotoneFunction};

fn err(e: smoothiso::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    pythonize(py, value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Parse a lowercase enum name such as `"l2"` or `"boundary"`.
fn parse_name<T: DeserializeOwned>(py: Python<'_>, what: &str, name: &str) -> PyResult<T> {
    depythonize(PyString::new(py, name).as_any())
        .map_err(|_| PyValueError::new_err(format!("unknown {what} `{name}`")))
}

fn kind_of(name: &str) -> PyResult<ModelKind> {
    match name {
        "regression" => Ok(ModelKind::Regression),
        "density" => Ok(ModelKind::Density),
        other => Err(PyValueError::new_err(format!("unknown model kind `{other}`"))),
    }
}

fn sample_of(ys: Vec<f64>, kind: ModelKind) -> PyResult<Sample> {
    match kind {
        ModelKind::Regression => Sample::from_responses(ys, None).map_err(err),
        ModelKind::Density => {
            let mut ys = ys;
            ys.sort_by(f64::total_cmp);
            let n = ys.len();
            Ok(Sample {
                n,
                xs: design(n),
                ys,
                sigma_true: None,
            })
        }
    }
}

fn kernel_or_default(kernel: Option<PyRef<'_, Kernel>>) -> KernelSpec {
    kernel.map(|k| k.0.clone()).unwrap_or_default()
}

fn load(name: &str, sigma: Option<f64>, a: Option<f64>, rule: BandwidthRule) -> PyResult<Scenario> {
    let mut params = HashMap::new();
    if let Some(s) = sigma {
        params.insert("sigma".to_string(), s);
    }
    if let Some(a) = a {
        params.insert("a".to_string(), a);
    }
    Ok(scenario(name, &params).map_err(err)?.with_rule(rule))
}

/// Polynomial kernel on `[-1, 1]`.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Kernel(KernelSpec);

#[pymethods]
impl Kernel {
    #[new]
    #[pyo3(signature = (name = "triweight"))]
    fn new(name: &str) -> PyResult<Self> {
        KernelSpec::by_name(name).map(Kernel).map_err(err)
    }

    /// Even polynomial kernel from coefficients of `1, u, u^2, ...`.
    #[staticmethod]
    fn polynomial(name: &str, coeffs: Vec<f64>) -> PyResult<Self> {
        KernelSpec::from_polynomial(name, coeffs).map(Kernel).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.0.name()
    }

    fn __call__(&self, u: f64) -> f64 {
        self.0.k(u)
    }

    /// `int k^2`.
    fn dsq(&self) -> f64 {
        self.0.dsq()
    }

    /// `int u^2 k(u) du`.
    fn second_moment(&self) -> f64 {
        self.0.second_moment()
    }

    /// Boundary-corrected kernel at `x` with bandwidth `b`, evaluated at `u`.
    fn boundary_value(&self, x: f64, b: f64, u: f64) -> PyResult<f64> {
        self.0.boundary_kernel_value(x, b, u).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Kernel('{}')", self.0.name())
    }
}

/// Twice differentiable target function on `[0, 1]`.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Function(MonotoneFunction);

#[pymethods]
impl Function {
    /// Built-in function by id, e.g. `Function("lambda_a", {"a": 0.25})`.
    #[new]
    #[pyo3(signature = (id, params = None))]
    fn new(id: &str, params: Option<HashMap<String, f64>>) -> PyResult<Self> {
        smoothiso::builtin_function(id, &params.unwrap_or_default())
            .map(Function)
            .map_err(err)
    }

    /// `sum_j coeffs[j] x^j`.
    #[staticmethod]
    fn polynomial(coeffs: Vec<f64>) -> Self {
        Function(MonotoneFunction::polynomial(coeffs))
    }

    #[getter]
    fn id(&self) -> &str {
        self.0.id()
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    fn deriv1(&self, t: f64) -> f64 {
        self.0.deriv1(t)
    }

    fn deriv2(&self, t: f64) -> f64 {
        self.0.deriv2(t)
    }

    fn is_decreasing(&self) -> bool {
        self.0.is_decreasing()
    }

    fn __repr__(&self) -> String {
        format!("Function('{}')", self.0.id())
    }
}

/// Responses `lambda(i/n) + sigma * eps_i`.
#[pyfunction]
fn simulate_regression(function: &Function, n: usize, sigma: f64, seed: u64) -> PyResult<Vec<f64>> {
    model::simulate_regression(&function.0, n, sigma, seed)
        .map(|s| s.ys)
        .map_err(err)
}

/// Sorted draws from the density `lambda`.
#[pyfunction]
fn simulate_density(function: &Function, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    model::simulate_density(&function.0, n, seed)
        .map(|s| s.ys)
        .map_err(err)
}

/// `n` equispaced points on `[a, b]`, both ends included.
#[pyfunction]
#[pyo3(signature = (n, a = 0.0, b = 1.0))]
fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
    uniform_grid(a, b, n)
}

/// Kernel estimate on `grid`; `corrected` switches on the boundary kernel.
#[pyfunction]
#[pyo3(signature = (ys, b, grid, kernel = None, kind = "regression", corrected = true))]
fn kernel_estimate(
    ys: Vec<f64>,
    b: f64,
    grid: Vec<f64>,
    kernel: Option<PyRef<'_, Kernel>>,
    kind: &str,
    corrected: bool,
) -> PyResult<Vec<f64>> {
    let k = kernel_or_default(kernel);
    let kind = kind_of(kind)?;
    let cumul = cumulative_step(&sample_of(ys, kind)?, kind).map_err(err)?;
    let smoother = KernelSmoother::new(&cumul, &k, b).map_err(err)?;
    grid.iter()
        .map(|&t| {
            if corrected && (0.0..=1.0).contains(&t) {
                Ok(smoother.corrected(t))
            } else {
                // out-of-range points get the library's error message
                estimators::kernel_estimator(&cumul, b, &k, t, corrected).map_err(err)
            }
        })
        .collect()
}

/// Smoothed Grenander-type estimate on `grid`.
#[pyfunction]
#[pyo3(signature = (ys, b, grid, kernel = None, kind = "regression"))]
fn smoothed_grenander(
    ys: Vec<f64>,
    b: f64,
    grid: Vec<f64>,
    kernel: Option<PyRef<'_, Kernel>>,
    kind: &str,
) -> PyResult<Vec<f64>> {
    let k = kernel_or_default(kernel);
    let kind = kind_of(kind)?;
    let cumul = cumulative_step(&sample_of(ys, kind)?, kind).map_err(err)?;
    estimators::smoothed_grenander(&cumul, b, &k, &grid)
        .map(|f| f.values)
        .map_err(err)
}

/// Isotonized kernel estimate on `grid` (spacing at most `b/10`).
#[pyfunction]
#[pyo3(signature = (ys, b, grid, kernel = None, kind = "regression", gamma = 0.75))]
fn isotonized_kernel(
    ys: Vec<f64>,
    b: f64,
    grid: Vec<f64>,
    kernel: Option<PyRef<'_, Kernel>>,
    kind: &str,
    gamma: f64,
) -> PyResult<Vec<f64>> {
    let k = kernel_or_default(kernel);
    let kind = kind_of(kind)?;
    let cumul = cumulative_step(&sample_of(ys, kind)?, kind).map_err(err)?;
    estimators::isotonized_kernel(&cumul, b, &k, &grid, gamma)
        .map(|e| e.estimate.values)
        .map_err(err)
}

/// Knots and values of the least concave majorant of `(ts[i], vs[i])`.
#[pyfunction]
fn least_concave_majorant(ts: Vec<f64>, vs: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    if ts.len() != vs.len() {
        return Err(PyValueError::new_err("ts and vs differ in length"));
    }
    let points: Vec<(f64, f64)> = ts.into_iter().zip(vs).collect();
    let pl = lcm::least_concave_majorant(&points).map_err(err)?;
    Ok((pl.knots().to_vec(), pl.knot_values().to_vec()))
}

/// Centering and variance constants for a named scenario with `b = bw_c n^-bw_exponent`.
#[pyfunction]
#[pyo3(signature = (scenario, p, n, bw_c = 1.0, bw_exponent = 0.2, sigma = None, a = None, centering = "full"))]
#[allow(clippy::too_many_arguments)]
fn constants<'py>(
    py: Python<'py>,
    scenario: &str,
    p: f64,
    n: usize,
    bw_c: f64,
    bw_exponent: f64,
    sigma: Option<f64>,
    a: Option<f64>,
    centering: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let centering: Centering = parse_name(py, "centering", centering)?;
    let rule = BandwidthRule::Power { c: bw_c, exponent: bw_exponent };
    let sc = load(scenario, sigma, a, rule)?;
    let b = rule.bandwidth(n);
    let c = AsymptoticConstants::compute(
        &sc.model,
        &sc.weight,
        &sc.kernel,
        p,
        n,
        b,
        rule.regime(),
        centering,
    )
    .map_err(err)?;
    let out = to_py(py, &c)?;
    out.set_item("b", b)?;
    out.set_item("sigma1", asympt::sigma1(&sc.kernel, p).map_err(err)?)?;
    Ok(out)
}

/// Standardized `L_p` errors over `replications` seeded samples.
#[pyfunction]
#[pyo3(signature = (
    scenario, estimator, p, n, replications, seed,
    bw_c = 1.0, bw_exponent = 0.2, sigma = None, a = None, centering = None, gamma = 0.75
))]
#[allow(clippy::too_many_arguments)]
fn clt_experiment<'py>(
    py: Python<'py>,
    scenario: &str,
    estimator: &str,
    p: f64,
    n: usize,
    replications: usize,
    seed: u64,
    bw_c: f64,
    bw_exponent: f64,
    sigma: Option<f64>,
    a: Option<f64>,
    centering: Option<&str>,
    gamma: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let estimator: EstimatorKind = parse_name(py, "estimator", estimator)?;
    let centering: Option<Centering> = centering
        .map(|c| parse_name(py, "centering", c))
        .transpose()?;
    let rule = BandwidthRule::Power { c: bw_c, exponent: bw_exponent };
    let sc = load(scenario, sigma, a, rule)?;
    let cfg = CltConfig {
        estimator,
        p,
        n,
        bandwidth: rule,
        replications,
        seed,
        centering,
        gamma,
    };
    let report = py
        .detach(|| mc::clt_experiment(&sc.model, &sc.weight, &sc.kernel, &cfg))
        .map_err(err)?;
    to_py(py, &report)
}

/// Draws of the concave-majorant gap at 0 of `W(t) - t^2` on `[-c, c]`.
#[pyfunction]
#[pyo3(signature = (c, step, m, seed))]
fn chernoff_gap_sample(py: Python<'_>, c: f64, step: f64, m: usize, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(|| mc::chernoff_gap_sample(c, step, m, seed))
        .map(|s| s.draws)
        .map_err(err)
}

/// Noise scale from first differences of the responses.
#[pyfunction]
fn rice_sigma(ys: Vec<f64>) -> PyResult<f64> {
    montest::rice_sigma(&sample_of(ys, ModelKind::Regression)?).map_err(err)
}

/// Distance between the smoothed Grenander and the corrected kernel estimate.
#[pyfunction]
#[pyo3(signature = (ys, b = 0.1, kernel = None, grid = 201, norm = "l2"))]
fn statistic_tn(
    py: Python<'_>,
    ys: Vec<f64>,
    b: f64,
    kernel: Option<PyRef<'_, Kernel>>,
    grid: usize,
    norm: &str,
) -> PyResult<f64> {
    let norm: TestNorm = parse_name(py, "norm", norm)?;
    let k = kernel_or_default(kernel);
    montest::statistic_tn(&sample_of(ys, ModelKind::Regression)?, b, &k, grid, norm).map_err(err)
}

fn test_config(py: Python<'_>, b: f64, bootstrap: usize, alpha: f64, norm: &str) -> PyResult<TestConfig> {
    Ok(TestConfig {
        b,
        bootstrap,
        alpha,
        norm: parse_name(py, "norm", norm)?,
        ..TestConfig::default()
    })
}

/// Bootstrap test of monotonicity for regression responses.
#[pyfunction]
#[pyo3(signature = (ys, seed, b = 0.1, bootstrap = 200, alpha = 0.05, norm = "l2", kernel = None))]
#[allow(clippy::too_many_arguments)]
fn bootstrap_test<'py>(
    py: Python<'py>,
    ys: Vec<f64>,
    seed: u64,
    b: f64,
    bootstrap: usize,
    alpha: f64,
    norm: &str,
    kernel: Option<PyRef<'_, Kernel>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = test_config(py, b, bootstrap, alpha, norm)?;
    let k = kernel_or_default(kernel);
    let sample = sample_of(ys, ModelKind::Regression)?;
    let out = py
        .detach(|| montest::bootstrap_test(&sample, &k, &cfg, seed))
        .map_err(err)?;
    to_py(py, &out)
}

/// Rejection rate of the bootstrap test over `trials` simulated data sets.
#[pyfunction]
#[pyo3(signature = (function, n, sigma, trials, seed, b = 0.1, bootstrap = 200, alpha = 0.05, norm = "l2", kernel = None))]
#[allow(clippy::too_many_arguments)]
fn power_study<'py>(
    py: Python<'py>,
    function: &Function,
    n: usize,
    sigma: f64,
    trials: usize,
    seed: u64,
    b: f64,
    bootstrap: usize,
    alpha: f64,
    norm: &str,
    kernel: Option<PyRef<'_, Kernel>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = test_config(py, b, bootstrap, alpha, norm)?;
    let k = kernel_or_default(kernel);
    let f = function.0.clone();
    let report = py
        .detach(|| montest::power_study(&f, n, sigma, &k, &cfg, trials, seed))
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn smoothiso_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Kernel>()?;
    m.add_class::<Function>()?;
    m.add_function(wrap_pyfunction!(simulate_regression, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_density, m)?)?;
    m.add_function(wrap_pyfunction!(grid, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(smoothed_grenander, m)?)?;
    m.add_function(wrap_pyfunction!(isotonized_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(least_concave_majorant, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(clt_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_gap_sample, m)?)?;
    m.add_function(wrap_pyfunction!(rice_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(statistic_tn, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_test, m)?)?;
    m.add_function(wrap_pyfunction!(power_study, m)?)?;
    Ok(())
}
