//! Weighted `L_p` errors and the weighted Hellinger distance.
//!
//! All integrals use composite Simpson on [`NODES`] uniform nodes so results
//! are reproducible across platforms.

use crate::error::{Error, Result};
use crate::func::WeightMeasure;
use crate::quad;

/// Simpson node count for every loss integral.
pub const NODES: usize = 2049;

fn check_interval(a1: f64, a2: f64) -> Result<()> {
    if !(0.0 <= a1 && a1 < a2 && a2 <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "interval [{a1}, {a2}] must satisfy 0 <= a1 < a2 <= 1"
        )));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::out_of_range("p", p, "[1, inf)"));
    }
    Ok(())
}

/// `int_{a1}^{a2} |f - g|^p w dt`, without the p-th root.
pub fn lp_error(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    p: f64,
    weight: &WeightMeasure,
    interval: (f64, f64),
) -> Result<f64> {
    lp_error_with_nodes(f, g, p, weight, interval, NODES)
}

/// [`lp_error`] with an explicit (odd) node count.
pub fn lp_error_with_nodes(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    p: f64,
    weight: &WeightMeasure,
    (a1, a2): (f64, f64),
    nodes: usize,
) -> Result<f64> {
    check_p(p)?;
    check_interval(a1, a2)?;
    Ok(quad::simpson(
        |t| (f(t) - g(t)).abs().powf(p) * weight.eval(t),
        a1,
        a2,
        nodes,
    ))
}

/// Simpson nodes of [`lp_error`] on `[a1, a2]`; evaluate an estimator there
/// once and pass the values to [`lp_error_on_nodes`].
pub fn loss_nodes(a1: f64, a2: f64) -> Result<Vec<f64>> {
    check_interval(a1, a2)?;
    Ok(quad::simpson_nodes(a1, a2, NODES))
}

/// `L_p` error from values of `f - g` at [`loss_nodes`].
pub fn lp_error_on_nodes(
    diff: &[f64],
    p: f64,
    weight: &WeightMeasure,
    (a1, a2): (f64, f64),
) -> Result<f64> {
    check_p(p)?;
    check_interval(a1, a2)?;
    if diff.len() < 3 || diff.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "need an odd number (>= 3) of node values, got {}",
            diff.len()
        )));
    }
    let h = (a2 - a1) / (diff.len() - 1) as f64;
    let vals: Vec<f64> = diff
        .iter()
        .enumerate()
        .map(|(i, d)| d.abs().powf(p) * weight.eval(a1 + h * i as f64))
        .collect();
    Ok(quad::simpson_values(&vals, h))
}

/// `(1/2 int (sqrt f - sqrt g)^2 dmu)^{1/2}` over `[0, 1]`.
pub fn hellinger(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    weight: &WeightMeasure,
) -> Result<f64> {
    let nodes = quad::simpson_nodes(0.0, 1.0, NODES);
    let fv: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
    let gv: Vec<f64> = nodes.iter().map(|&t| g(t)).collect();
    hellinger_on_nodes(&fv, &gv, weight)
}

/// [`hellinger`] from values at `loss_nodes(0, 1)`.
pub fn hellinger_on_nodes(f: &[f64], g: &[f64], weight: &WeightMeasure) -> Result<f64> {
    if f.len() != NODES || g.len() != NODES {
        return Err(Error::InvalidArgument(format!("expected {NODES} node values")));
    }
    let nodes = quad::simpson_nodes(0.0, 1.0, NODES);
    let mut vals = Vec::with_capacity(NODES);
    for ((&t, &a), &b) in nodes.iter().zip(f).zip(g) {
        for v in [a, b] {
            if !(v > 0.0) {
                return Err(Error::NonPositive { t, value: v });
            }
        }
        let d = a.sqrt() - b.sqrt();
        vals.push(d * d * weight.eval(t));
    }
    let h = 1.0 / (NODES - 1) as f64;
    Ok((0.5 * quad::simpson_values(&vals, h)).sqrt())
}
