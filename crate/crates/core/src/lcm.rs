//! Least concave majorants, their left-hand slopes, and the concavity gap.

use crate::error::{Error, Result};
use crate::func::{Continuity, PiecewiseLinear, StepFunction};

/// Indices of the upper concave hull of `(ts[i], vs[i])`, computed by one
/// monotone-chain pass. Collinear interior points are dropped.
///
/// `ts` must be strictly ascending.
pub fn upper_hull_indices(ts: &[f64], vs: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(ts.len().min(64));
    for i in 0..ts.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let (dx1, dy1) = (ts[b] - ts[a], vs[b] - vs[a]);
            let (dx2, dy2) = (ts[i] - ts[a], vs[i] - vs[a]);
            let cross = dx1 * dy2 - dy1 * dx2;
            let scale = (dx1 * dy2).abs() + (dy1 * dx2).abs();
            // b stays only when the turn a -> b -> i is strictly clockwise
            if cross >= -1e-14 * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

fn check_ascending(ts: &[f64]) -> Result<()> {
    if let Some(i) = ts.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Unordered(i + 1));
    }
    Ok(())
}

/// Least concave majorant of a finite point set, as a piecewise-linear curve
/// whose knots are a subsequence of the input.
pub fn least_concave_majorant(points: &[(f64, f64)]) -> Result<PiecewiseLinear> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "least concave majorant needs at least two points".into(),
        ));
    }
    let (ts, vs): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    check_ascending(&ts)?;
    if ts.iter().chain(&vs).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point".into()));
    }
    let idx = upper_hull_indices(&ts, &vs);
    PiecewiseLinear::new(
        idx.iter().map(|&i| ts[i]).collect(),
        idx.iter().map(|&i| vs[i]).collect(),
    )
}

/// Left-hand slopes of a concave piecewise-linear curve.
///
/// The result is left-continuous at the knots; at the left end of the domain
/// it takes the first segment's slope.
pub fn grenander_slopes(pl: &PiecewiseLinear) -> Result<StepFunction> {
    let slopes = pl.slopes();
    let scale = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1.0);
    if let Some(i) = slopes.windows(2).position(|w| w[1] > w[0] + 1e-12 * scale) {
        return Err(Error::NotConcave(i + 1));
    }
    let knots = pl.knots();
    // the value changes right after each interior knot
    let breakpoints = knots[1..knots.len() - 1].to_vec();
    StepFunction::new(breakpoints, slopes[1..].to_vec(), slopes[0], Continuity::Left)
}

/// `(CM h)(t0) - h(t0)` where `h` interpolates the points linearly.
pub fn concave_gap(points: &[(f64, f64)], t0: f64) -> Result<f64> {
    let hull = least_concave_majorant(points)?;
    let (lo, hi) = hull.domain();
    if !(lo..=hi).contains(&t0) {
        return Err(Error::out_of_range("t0", t0, format!("[{lo}, {hi}]")));
    }
    let (ts, vs): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let data = PiecewiseLinear::new(ts, vs)?;
    Ok((hull.eval(t0) - data.eval(t0)).max(0.0))
}
