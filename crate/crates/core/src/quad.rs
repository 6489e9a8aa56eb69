//! Quadrature rules shared by the loss functionals and the limit constants.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::{FiniteAboveNegOneF64, GaussHermite, GaussJacobi, GaussLegendre};
use statrs::function::gamma::gamma;

/// Nodes and weights of a rule on a reference domain.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrate over `[a, b]` a Gauss-Legendre rule defined on `[-1, 1]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Expectation under the standard normal law (for rules built by [`normal_rule`]).
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

type Cache = Mutex<HashMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: impl FnOnce() -> Rule) -> Arc<Rule> {
    let cache = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(build())).clone()
}

/// `n`-node Gauss-Legendre rule on `[-1, 1]`.
pub fn legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, || {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n > 0"));
        let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
        Rule { nodes, weights }
    })
}

/// `n`-node Gauss-Hermite rule rescaled so that `expect` integrates against
/// the standard normal density.
pub fn normal_rule(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, || {
        let rule = GaussHermite::new(NonZeroUsize::new(n).expect("n > 0"));
        let scale = std::f64::consts::PI.sqrt().recip();
        let (nodes, weights) = rule
            .iter()
            .map(|(x, w)| (x * std::f64::consts::SQRT_2, w * scale))
            .unzip();
        Rule { nodes, weights }
    })
}

/// `n`-node rule for `int_0^1 x^p f(x) dx`.
pub fn power_weight_rule(n: usize, p: f64) -> Arc<Rule> {
    type Cache = Mutex<HashMap<(usize, u64), Arc<Rule>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry((n, p.to_bits()))
        .or_insert_with(|| {
            let rule = GaussJacobi::new(
                NonZeroUsize::new(n).expect("n > 0"),
                FiniteAboveNegOneF64::new(0.0).unwrap(),
                FiniteAboveNegOneF64::new(p).expect("p > -1"),
            );
            // weight (1+x)^p on [-1, 1]; map x -> (1+x)/2
            let scale = 0.5f64.powf(p + 1.0);
            let (nodes, weights) = rule
                .iter()
                .map(|(x, w)| (0.5 * (1.0 + x), w * scale))
                .unzip();
            Arc::new(Rule { nodes, weights })
        })
        .clone()
}

/// `E|m + s Z|^p` for standard normal `Z`, in closed form.
///
/// Uses `E|N(m, s^2)|^p = s^p 2^{p/2} Gamma((p+1)/2) / sqrt(pi) * M(-p/2, 1/2, -z)`
/// with `z = m^2 / (2 s^2)`, evaluated through Kummer's transformation so
/// that the hypergeometric series has positive terms. When `|m| / s > 10`
/// the integrand is smooth over the normal mass and Gauss-Hermite is used.
pub fn abs_moment(m: f64, s: f64, p: f64) -> f64 {
    let s = s.abs();
    if s == 0.0 {
        return m.abs().powf(p);
    }
    let z = m * m / (2.0 * s * s);
    if z > 50.0 {
        return normal_rule(40).expect(|x| (m + s * x).abs().powf(p));
    }
    let a = 0.5 * (p + 1.0);
    let (mut term, mut sum, mut k) = (1.0f64, 1.0f64, 0.0f64);
    loop {
        term *= (a + k) / ((0.5 + k) * (k + 1.0)) * z;
        sum += term;
        k += 1.0;
        if term < 1e-17 * sum && k > z {
            break;
        }
    }
    let base = s.powf(p) * 2f64.powf(0.5 * p) * gamma(a) / std::f64::consts::PI.sqrt();
    base * (-z).exp() * sum
}

/// `E[|Y - y0|^p f(Y)]` for standard normal `Y` and smooth `f`.
///
/// The kink of `|y - y0|^p` is handled by splitting at `y0` and integrating
/// each half-line piece with a Gauss-Jacobi rule carrying the weight `v^p`.
pub fn kink_expect<F: FnMut(f64) -> f64>(y0: f64, p: f64, mut f: F) -> f64 {
    if y0.abs() > 8.5 {
        return normal_rule(40).expect(|y| (y - y0).abs().powf(p) * f(y));
    }
    let rule = power_weight_rule(64, p);
    let phi = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut total = 0.0;
    for (dir, len) in [(1.0, (9.0 - y0).max(1.0)), (-1.0, (9.0 + y0).max(1.0))] {
        let scale = len.powf(p + 1.0);
        let part: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| {
                let y = y0 + dir * len * x;
                w * f(y) * phi(y)
            })
            .sum();
        total += scale * part;
    }
    total
}

/// Uniform nodes for composite Simpson; `n` must be odd and at least 3.
pub fn simpson_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + h * i as f64 })
        .collect()
}

/// Composite Simpson sum over values on a uniform grid of spacing `h`.
pub fn simpson_values(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let inner: f64 = values[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[n - 1])
}

/// Composite Simpson on `n` (odd) uniform nodes.
pub fn simpson<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let values: Vec<f64> = simpson_nodes(a, b, n).into_iter().map(f).collect();
    simpson_values(&values, (b - a) / (n - 1) as f64)
}

/// Adaptive double-exponential quadrature to an absolute tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    quadrature::integrate(f, a, b, tol).integral
}
