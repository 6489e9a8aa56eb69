//! Kernel, boundary-corrected kernel, smoothed Grenander-type, and isotonized
//! kernel estimators of a decreasing function on `[0, 1]`.
//!
//! All estimators integrate the kernel against a step or piecewise-linear
//! function, so every integral is a finite sum of kernel antiderivative
//! differences and there is no quadrature error.

use crate::error::{check_bandwidth, Error, Result};
use crate::func::{PiecewiseLinear, SampledFunction, StepFunction};
use crate::kernel::{KernelSpec, LocalKernel};
use crate::lcm;

/// Kernel smoothing of the jumps of a cumulative step function.
#[derive(Debug, Clone)]
pub struct KernelSmoother<'a> {
    kernel: &'a KernelSpec,
    b: f64,
    locations: &'a [f64],
    jumps: Vec<f64>,
}

impl<'a> KernelSmoother<'a> {
    pub fn new(cumul: &'a StepFunction, kernel: &'a KernelSpec, b: f64) -> Result<Self> {
        check_bandwidth(b)?;
        let jumps = (0..cumul.breakpoints().len()).map(|j| cumul.jump(j)).collect();
        Ok(KernelSmoother {
            kernel,
            b,
            locations: cumul.breakpoints(),
            jumps,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.b
    }

    /// `sum_j k_b^{lk}(t - u_j) * jump_j` over jumps in `(t - b, t + b)`.
    pub fn with_local(&self, t: f64, lk: LocalKernel) -> f64 {
        let b = self.b;
        let lo = self.locations.partition_point(|&u| u <= t - b);
        let hi = self.locations.partition_point(|&u| u < t + b);
        let inv_b = 1.0 / b;
        let sum: f64 = self.locations[lo..hi]
            .iter()
            .zip(&self.jumps[lo..hi])
            .map(|(&u, &d)| d * self.kernel.local_value(lk, (t - u) * inv_b))
            .sum();
        sum * inv_b
    }

    /// Standard kernel estimate without boundary correction. Near the
    /// boundaries this truncates the kernel at the edge of the data.
    pub fn standard(&self, t: f64) -> f64 {
        self.with_local(t, LocalKernel::PLAIN)
    }

    /// Boundary-corrected kernel estimate; equals [`standard`](Self::standard)
    /// on `[b, 1-b]`.
    pub fn corrected(&self, t: f64) -> f64 {
        self.with_local(t, self.kernel.local(t, self.b))
    }
}

/// Kernel estimate at `t`. Without correction `t` must lie in `[b, 1-b]`.
pub fn kernel_estimator(
    cumul: &StepFunction,
    b: f64,
    kernel: &KernelSpec,
    t: f64,
    corrected: bool,
) -> Result<f64> {
    let smoother = KernelSmoother::new(cumul, kernel, b)?;
    if corrected {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::out_of_range("t", t, "[0, 1]"));
        }
        Ok(smoother.corrected(t))
    } else {
        if !(b..=1.0 - b).contains(&t) {
            return Err(Error::out_of_range("t", t, format!("[{b}, {}]", 1.0 - b)));
        }
        Ok(smoother.standard(t))
    }
}

/// The kernel-smoothed cumulative `Lambda_n^s(t) = int k_b^{(t)}(t-u) Lambda_n(u) du`.
#[derive(Debug, Clone)]
pub struct SmoothedCumulative<'a> {
    kernel: &'a KernelSpec,
    b: f64,
    /// Constancy cells `[edges[j], edges[j+1])` with value `values[j]`.
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl<'a> SmoothedCumulative<'a> {
    pub fn new(cumul: &StepFunction, kernel: &'a KernelSpec, b: f64) -> Result<Self> {
        check_bandwidth(b)?;
        let mut edges = Vec::with_capacity(cumul.breakpoints().len() + 2);
        let mut values = Vec::with_capacity(cumul.breakpoints().len() + 1);
        edges.push(0.0);
        values.push(cumul.initial());
        for (&u, &v) in cumul.breakpoints().iter().zip(cumul.values()) {
            if u <= 0.0 {
                *values.last_mut().unwrap() = v;
                continue;
            }
            if u >= 1.0 {
                break;
            }
            edges.push(u);
            values.push(v);
        }
        // a jump at 1 only changes the integrand on a null set
        edges.push(1.0);
        Ok(SmoothedCumulative {
            kernel,
            b,
            edges,
            values,
        })
    }

    fn cells(&self, t: f64) -> std::ops::Range<usize> {
        let b = self.b;
        // cell j overlaps (t-b, t+b) iff edges[j+1] > t-b and edges[j] < t+b
        let first = self.edges[1..].partition_point(|&e| e <= t - b);
        let last = self.edges.partition_point(|&e| e < t + b).min(self.values.len());
        first..last.max(first)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let lk = self.kernel.local(t, self.b);
        let inv_b = 1.0 / self.b;
        self.cells(t)
            .map(|j| {
                let upper = self.kernel.local_anti(lk, (t - self.edges[j]) * inv_b);
                let lower = self.kernel.local_anti(lk, (t - self.edges[j + 1]) * inv_b);
                self.values[j] * (upper - lower)
            })
            .sum()
    }

    /// `d/dt Lambda_n^s(t)`, the naive estimator. On `[b, 1-b]` this is the
    /// standard kernel estimate.
    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.kernel;
        let lk = k.local(t, self.b);
        let dlk = k.local_deriv(t, self.b);
        let inv_b = 1.0 / self.b;
        let term = |v: f64| {
            k.local_value(lk, v) * inv_b + dlk.psi1 * k.k0(v) + dlk.psi2 * k.k1(v)
        };
        self.cells(t)
            .map(|j| {
                let upper = term((t - self.edges[j]) * inv_b);
                let lower = term((t - self.edges[j + 1]) * inv_b);
                self.values[j] * (upper - lower)
            })
            .sum()
    }
}

/// `Lambda_n^s(t)`.
pub fn smooth_cumulative(cumul: &StepFunction, b: f64, kernel: &KernelSpec, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::out_of_range("t", t, "[0, 1]"));
    }
    Ok(SmoothedCumulative::new(cumul, kernel, b)?.eval(t))
}

/// Least concave majorant of a cumulative step function, anchored at
/// `(0, Lambda_n(0))` and `(1, Lambda_n(1))`.
pub fn cumulative_majorant(cumul: &StepFunction) -> Result<PiecewiseLinear> {
    let bp = cumul.breakpoints();
    let mut ts = Vec::with_capacity(bp.len() + 2);
    let mut vs = Vec::with_capacity(bp.len() + 2);
    ts.push(0.0);
    vs.push(cumul.initial());
    for (&u, &v) in bp.iter().zip(cumul.values()) {
        if u <= 0.0 {
            vs[0] = v;
        } else if u <= 1.0 {
            ts.push(u);
            vs.push(v);
        }
    }
    if *ts.last().unwrap() < 1.0 {
        ts.push(1.0);
        vs.push(cumul.eval(1.0));
    }
    let idx = lcm::upper_hull_indices(&ts, &vs);
    PiecewiseLinear::new(
        idx.iter().map(|&i| ts[i]).collect(),
        idx.iter().map(|&i| vs[i]).collect(),
    )
}

/// Smoothed Grenander-type estimator: the boundary-corrected kernel
/// integrated against the measure of the least concave majorant.
#[derive(Debug, Clone)]
pub struct SmoothedGrenander<'a> {
    kernel: &'a KernelSpec,
    b: f64,
    hull: PiecewiseLinear,
    slopes: Vec<f64>,
}

impl<'a> SmoothedGrenander<'a> {
    pub fn new(cumul: &StepFunction, kernel: &'a KernelSpec, b: f64) -> Result<Self> {
        check_bandwidth(b)?;
        let hull = cumulative_majorant(cumul)?;
        let slopes = hull.slopes();
        Ok(SmoothedGrenander {
            kernel,
            b,
            hull,
            slopes,
        })
    }

    pub fn majorant(&self) -> &PiecewiseLinear {
        &self.hull
    }

    pub fn eval(&self, t: f64) -> f64 {
        let b = self.b;
        let lk = self.kernel.local(t, b);
        let inv_b = 1.0 / b;
        let knots = self.hull.knots();
        let first = knots[1..].partition_point(|&a| a <= t - b);
        let last = knots.partition_point(|&a| a < t + b).min(self.slopes.len());
        (first..last.max(first))
            .map(|j| {
                let upper = self.kernel.local_anti(lk, (t - knots[j]) * inv_b);
                let lower = self.kernel.local_anti(lk, (t - knots[j + 1]) * inv_b);
                self.slopes[j] * (upper - lower)
            })
            .sum()
    }
}

pub fn smoothed_grenander(
    cumul: &StepFunction,
    b: f64,
    kernel: &KernelSpec,
    grid: &[f64],
) -> Result<SampledFunction> {
    let sg = SmoothedGrenander::new(cumul, kernel, b)?;
    SampledFunction::new(grid.to_vec(), grid.iter().map(|&t| sg.eval(t)).collect())
}

/// Output of [`isotonized_kernel`].
#[derive(Debug, Clone)]
pub struct IsotonizedEstimate {
    pub estimate: SampledFunction,
    /// `[b^gamma, 1 - b^gamma]`, where the isotonized and the plain kernel
    /// estimator coincide with probability tending to one.
    pub clt_interval: (f64, f64),
}

/// Isotonized kernel estimator: left-hand slopes of the least concave
/// majorant of `Lambda_n^s`.
///
/// `Lambda_n^s` is sampled on an internal grid of step at most `b/50`. Where
/// the majorant touches two consecutive samples the exact derivative of
/// `Lambda_n^s` is reported (clamped between the neighbouring chord slopes),
/// elsewhere the slope of the majorant segment.
pub fn isotonized_kernel(
    cumul: &StepFunction,
    b: f64,
    kernel: &KernelSpec,
    grid: &[f64],
    gamma: f64,
) -> Result<IsotonizedEstimate> {
    check_bandwidth(b)?;
    if !(gamma > 0.5 && gamma < 1.0) {
        return Err(Error::out_of_range("gamma", gamma, "(1/2, 1)"));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] - w[0] > b / 10.0 * (1.0 + 1e-9)) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing {} exceeds b/10 = {}",
            w[1] - w[0],
            b / 10.0
        )));
    }
    let smooth = SmoothedCumulative::new(cumul, kernel, b)?;
    let cells = (50.0 / b).ceil() as usize;
    let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let samples: Vec<f64> = nodes.iter().map(|&t| smooth.eval(t)).collect();
    let hull = lcm::upper_hull_indices(&nodes, &samples);
    let seg_slopes: Vec<f64> = hull
        .windows(2)
        .map(|w| (samples[w[1]] - samples[w[0]]) / (nodes[w[1]] - nodes[w[0]]))
        .collect();

    let values = grid
        .iter()
        .map(|&t| {
            let cell = nodes.partition_point(|&g| g < t).saturating_sub(1).min(cells - 1);
            // hull segment j covers cells hull[j] .. hull[j+1]-1
            let j = hull.partition_point(|&h| h <= cell) - 1;
            if hull[j + 1] == hull[j] + 1 {
                let hi = if j > 0 { seg_slopes[j - 1] } else { f64::INFINITY };
                let lo = seg_slopes.get(j + 1).copied().unwrap_or(f64::NEG_INFINITY);
                smooth.derivative(t).clamp(lo, hi)
            } else {
                seg_slopes[j]
            }
        })
        .collect();
    let edge = b.powf(gamma);
    Ok(IsotonizedEstimate {
        estimate: SampledFunction::new(grid.to_vec(), values)?,
        clt_interval: (edge, 1.0 - edge),
    })
}
