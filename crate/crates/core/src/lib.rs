//! Smooth isotonic estimation of a monotone function on `[0, 1]`.
//!
//! The crate provides the standard and boundary-corrected kernel estimators,
//! the smoothed Grenander-type estimator (smoothing after isotonization), the
//! isotonized kernel estimator (isotonization after smoothing), numerical
//! evaluation of the constants that appear in the central limit theorems for
//! their `L_p`-errors, a seeded Monte-Carlo engine that checks those limits
//! empirically, and a bootstrap test for monotonicity of a regression function.
//!
//! Every random quantity is a pure function of a master seed and a
//! replication path (see [`rng`]), so results do not depend on the number of
//! worker threads.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod error;
pub mod estimators;
pub mod func;
pub mod io;
pub mod kernel;
pub mod lcm;
pub mod loss;
pub mod mc;
pub mod model;
pub mod montest;
pub mod quad;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use func::{
    builtin_function, Continuity, MonotoneFunction, PiecewiseLinear, SampledFunction,
    StepFunction, WeightMeasure,
};
pub use kernel::KernelSpec;
pub use model::{Embedding, ModelKind, ModelSpec, Sample};
