//! Convex dispersion kernels.
//!
//! A kernel `phi(x) = a x^2 + b x^4` with `a > 0`, `b >= 0` measures how
//! far a bundle value strays from its mean: the dispersion moment of a
//! distribution is `E[phi(w - m)]`. The family is strongly convex
//! (`phi'' >= 2a` everywhere, including at 0) and closed under the exact
//! antiderivatives the solver and the quadrature oracles need.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Dispersion kernel `phi(x) = a x^2 + b x^4` with `phi(0) = 0`.
///
/// `Quadratic` is the variance kernel, shorthand for `Quartic { a: 1, b: 0 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Dispersion {
    Quadratic,
    Quartic { a: f64, b: f64 },
}

impl Dispersion {
    /// Coefficients `(a, b)` of `a x^2 + b x^4`.
    pub fn coefficients(&self) -> (f64, f64) {
        match *self {
            Dispersion::Quadratic => (1.0, 0.0),
            Dispersion::Quartic { a, b } => (a, b),
        }
    }

    /// Checks `a > 0` and `b >= 0`; both finite.
    pub fn validate(&self) -> Result<(), Error> {
        let (a, b) = self.coefficients();
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b >= 0.0) {
            return Err(Error::InvalidProblem(format!(
                "kernel must have a > 0 and b >= 0, got a={a}, b={b}"
            )));
        }
        Ok(())
    }

    /// `phi(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.coefficients();
        let x2 = x * x;
        a * x2 + b * x2 * x2
    }

    /// `phi'(x) = 2 a x + 4 b x^3`.
    pub fn d1(&self, x: f64) -> f64 {
        let (a, b) = self.coefficients();
        2.0 * a * x + 4.0 * b * x * x * x
    }

    /// `phi''(x) = 2 a + 12 b x^2`.
    pub fn d2(&self, x: f64) -> f64 {
        let (a, b) = self.coefficients();
        2.0 * a + 12.0 * b * x * x
    }

    /// Analytic derivative of the requested order (1 or 2).
    pub fn deriv(&self, x: f64, order: u8) -> f64 {
        match order {
            1 => self.d1(x),
            2 => self.d2(x),
            _ => panic!("derivative order must be 1 or 2"),
        }
    }

    /// The strong-convexity floor `inf phi'' = 2a`.
    pub fn convexity_floor(&self) -> f64 {
        2.0 * self.coefficients().0
    }
}

/// `int_{w0}^{w1} phi(u - m) / u^2 du`, exact.
pub(crate) fn int_phi_over_x2(kernel: Dispersion, m: f64, w0: f64, w1: f64) -> f64 {
    let (a, b) = kernel.coefficients();
    let anti = |u: f64| {
        let lu = u.ln();
        a * (u - 2.0 * m * lu - m * m / u)
            + b * (u * u * u / 3.0 - 2.0 * m * u * u + 6.0 * m * m * u
                - 4.0 * m * m * m * lu
                - m * m * m * m / u)
    };
    anti(w1) - anti(w0)
}

/// `int_{w0}^{w1} phi'(u - m) / u du`, exact.
pub(crate) fn int_dphi_over_x(kernel: Dispersion, m: f64, w0: f64, w1: f64) -> f64 {
    let (a, b) = kernel.coefficients();
    let anti = |u: f64| {
        let lu = u.ln();
        2.0 * a * (u - m * lu)
            + 4.0 * b * (u * u * u / 3.0 - 1.5 * m * u * u + 3.0 * m * m * u - m * m * m * lu)
    };
    anti(w1) - anti(w0)
}

/// `int_{w0}^{w1} phi'(u - m) / u^2 du`, exact.
pub(crate) fn int_dphi_over_x2(kernel: Dispersion, m: f64, w0: f64, w1: f64) -> f64 {
    let (a, b) = kernel.coefficients();
    let anti = |u: f64| {
        let lu = u.ln();
        2.0 * a * (lu + m / u)
            + 4.0 * b * (0.5 * u * u - 3.0 * m * u + 3.0 * m * m * lu + m * m * m / u)
    };
    anti(w1) - anti(w0)
}
