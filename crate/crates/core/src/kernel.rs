//! Polynomial kernels on `[-1, 1]`, their moment antiderivatives, and the
//! boundary-corrected kernel.
//!
//! A kernel is stored as the coefficients of an even polynomial, so that the
//! antiderivatives `K_m(s) = int_{-1}^s u^m k(u) du` for `m = 0, 1, 2` are
//! polynomials as well and every kernel/step-function integral in the
//! estimators is exact.

use crate::error::{check_bandwidth, Error, Result};
use crate::quad;

#[derive(Debug, Clone)]
pub struct KernelSpec {
    name: String,
    /// `k(u) = sum_j coeffs[j] u^j` on `[-1, 1]`.
    coeffs: Vec<f64>,
    deriv: Vec<f64>,
    /// Antiderivative polynomials of `u^m k(u)`, anchored at `-1`.
    anti: [Vec<f64>; 3],
    anti_at_minus_one: [f64; 3],
    dsq: f64,
    second_moment: f64,
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &cj| acc * x + cj)
}

/// Local boundary-corrected kernel `k^{(t)}(v) = psi1 k(v) + psi2 v k(v)`.
///
/// In the right boundary region `psi2` already carries the minus sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalKernel {
    pub psi1: f64,
    pub psi2: f64,
}

impl LocalKernel {
    pub const PLAIN: LocalKernel = LocalKernel { psi1: 1.0, psi2: 0.0 };
}

/// Names accepted by [`KernelSpec::by_name`].
pub const KERNEL_NAMES: &[&str] = &["triweight", "quadriweight"];

impl KernelSpec {
    /// Build from an even polynomial supported on `[-1, 1]`.
    pub fn from_polynomial(name: impl Into<String>, coeffs: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if coeffs.iter().skip(1).step_by(2).any(|c| *c != 0.0) {
            return Err(Error::InvalidArgument(format!("kernel `{name}` is not symmetric")));
        }
        let deriv: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c)
            .collect();
        let anti = [0usize, 1, 2].map(|m| {
            let mut a = vec![0.0; coeffs.len() + m + 1];
            for (j, c) in coeffs.iter().enumerate() {
                a[j + m + 1] = c / (j + m + 1) as f64;
            }
            a
        });
        let anti_at_minus_one = [0, 1, 2].map(|m| horner(&anti[m], -1.0));
        let square: Vec<f64> = {
            let mut sq = vec![0.0; 2 * coeffs.len() - 1];
            for (i, a) in coeffs.iter().enumerate() {
                for (j, b) in coeffs.iter().enumerate() {
                    sq[i + j] += a * b;
                }
            }
            sq
        };
        let dsq: f64 = square
            .iter()
            .enumerate()
            .filter(|(j, _)| j % 2 == 0)
            .map(|(j, c)| 2.0 * c / (j + 1) as f64)
            .sum();
        let mut kernel = KernelSpec {
            name,
            coeffs,
            deriv,
            anti,
            anti_at_minus_one,
            dsq,
            second_moment: 0.0,
        };
        kernel.second_moment = kernel.k2(1.0);
        if (kernel.k0(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "kernel `{}` has mass {}",
                kernel.name,
                kernel.k0(1.0)
            )));
        }
        Ok(kernel)
    }

    /// `k(u) = (35/32) (1 - u^2)^3`.
    pub fn triweight() -> Self {
        let c = 35.0 / 32.0;
        Self::from_polynomial("triweight", vec![c, 0.0, -3.0 * c, 0.0, 3.0 * c, 0.0, -c])
            .expect("triweight is a valid kernel")
    }

    /// `k(u) = (315/256) (1 - u^2)^4`.
    pub fn quadriweight() -> Self {
        let c = 315.0 / 256.0;
        Self::from_polynomial(
            "quadriweight",
            vec![c, 0.0, -4.0 * c, 0.0, 6.0 * c, 0.0, -4.0 * c, 0.0, c],
        )
        .expect("quadriweight is a valid kernel")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "triweight" => Ok(Self::triweight()),
            "quadriweight" => Ok(Self::quadriweight()),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn k(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            horner(&self.coeffs, u)
        }
    }

    #[inline]
    pub fn kprime(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            horner(&self.deriv, u)
        }
    }

    #[inline]
    fn moment_anti(&self, m: usize, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        let s = s.min(1.0);
        horner(&self.anti[m], s) - self.anti_at_minus_one[m]
    }

    /// `int_{-1}^s k`.
    #[inline]
    pub fn k0(&self, s: f64) -> f64 {
        self.moment_anti(0, s)
    }

    /// `int_{-1}^s u k(u) du`.
    #[inline]
    pub fn k1(&self, s: f64) -> f64 {
        self.moment_anti(1, s)
    }

    /// `int_{-1}^s u^2 k(u) du`.
    #[inline]
    pub fn k2(&self, s: f64) -> f64 {
        self.moment_anti(2, s)
    }

    /// `D^2 = int k^2`.
    pub fn dsq(&self) -> f64 {
        self.dsq
    }

    /// `int u^2 k(u) du`.
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// `(psi1, psi2)` solving the unit-mass / zero-first-moment system on `[-1, s]`.
    pub fn boundary_coeffs(&self, s: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::out_of_range("s", s, "[0, 1]"));
        }
        let (a0, a1, a2) = (self.k0(s), self.k1(s), self.k2(s));
        let det = a0 * a2 - a1 * a1;
        if !(det > 1e-14) {
            return Err(Error::SingularBoundarySystem { s, det });
        }
        Ok((a2 / det, -a1 / det))
    }

    /// Derivatives of `(psi1, psi2)` with respect to `s`.
    fn boundary_coeffs_deriv(&self, s: f64) -> (f64, f64) {
        let (a0, a1, a2) = (self.k0(s), self.k1(s), self.k2(s));
        let det = a0 * a2 - a1 * a1;
        let (p1, p2) = (a2 / det, -a1 / det);
        let f = -self.k(s) * (p1 + s * p2) / det;
        (f * (a2 - s * a1), f * (s * a0 - a1))
    }

    /// Local kernel at position `t` for bandwidth `b` (assumes `b < 1/2`).
    #[inline]
    pub fn local(&self, t: f64, b: f64) -> LocalKernel {
        if t < b {
            let (psi1, psi2) = self
                .boundary_coeffs((t / b).max(0.0))
                .expect("boundary system is regular on [0, 1]");
            LocalKernel { psi1, psi2 }
        } else if t > 1.0 - b {
            let (psi1, psi2) = self
                .boundary_coeffs(((1.0 - t) / b).max(0.0))
                .expect("boundary system is regular on [0, 1]");
            LocalKernel { psi1, psi2: -psi2 }
        } else {
            LocalKernel::PLAIN
        }
    }

    /// `d/dt` of the local coefficients at position `t`.
    pub(crate) fn local_deriv(&self, t: f64, b: f64) -> LocalKernel {
        if t < b {
            let (d1, d2) = self.boundary_coeffs_deriv(t / b);
            LocalKernel {
                psi1: d1 / b,
                psi2: d2 / b,
            }
        } else if t > 1.0 - b {
            let (d1, d2) = self.boundary_coeffs_deriv((1.0 - t) / b);
            LocalKernel {
                psi1: -d1 / b,
                psi2: d2 / b,
            }
        } else {
            LocalKernel {
                psi1: 0.0,
                psi2: 0.0,
            }
        }
    }

    /// `k^{(t)}(v)`.
    #[inline]
    pub fn local_value(&self, lk: LocalKernel, v: f64) -> f64 {
        (lk.psi1 + lk.psi2 * v) * self.k(v)
    }

    /// `int_{-1}^v k^{(t)}`.
    #[inline]
    pub fn local_anti(&self, lk: LocalKernel, v: f64) -> f64 {
        lk.psi1 * self.k0(v) + lk.psi2 * self.k1(v)
    }

    /// The boundary kernel `k^{(x)}(u)` for bandwidth `b`.
    pub fn boundary_kernel_value(&self, x: f64, b: f64, u: f64) -> Result<f64> {
        check_bandwidth(b)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::out_of_range("x", x, "[0, 1]"));
        }
        Ok(self.local_value(self.local(x, b), u))
    }

    /// `r(s) = int k(z) k(s+z) dz / int k^2`.
    pub fn autocorrelation_r(&self, s: f64) -> f64 {
        let lo = (-1.0f64).max(-1.0 - s);
        let hi = 1.0f64.min(1.0 - s);
        if hi <= lo {
            return 0.0;
        }
        quad::legendre(256).integrate(lo, hi, |z| self.k(z) * self.k(s + z)) / self.dsq
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::triweight()
    }
}
