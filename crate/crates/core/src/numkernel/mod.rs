//! Scalar numerical primitives shared by the analytic modules.

mod quad;
mod root;

pub use quad::adaptive_quad;
pub use root::{find_root, find_root_bracketed, Bracketed};

use crate::error::{Error, Result};

/// Stopping rule shared by quadrature and root finding.
///
/// For quadrature `max_iter` bounds the number of subintervals; for root
/// finding it bounds the number of function evaluations after the initial two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
    rel_tol: f64,
    max_iter: usize,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_iter: 200,
    };

    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::Domain("abs_tol must be positive and finite"));
        }
        if !(rel_tol >= 0.0) || !rel_tol.is_finite() {
            return Err(Error::Domain("rel_tol must be non-negative and finite"));
        }
        if max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    pub(crate) const fn new_unchecked(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_iter,
        }
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Below this distance from `-1` the exponent is treated as exactly `-1`.
const LOG_BRANCH_WINDOW: f64 = 1e-12;

/// Exact value of `∫_a^b t^exponent dt` for `0 <= a <= b < ∞`.
///
/// `a = 0` is only accepted when the integral converges (`exponent > -1`).
pub fn power_integral(a: f64, b: f64, exponent: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= a) || !b.is_finite() || !exponent.is_finite() {
        return Err(Error::Domain("power_integral requires 0 <= a <= b < inf"));
    }
    if a == b {
        return Ok(0.0);
    }
    let e1 = exponent + 1.0;
    if a == 0.0 {
        if e1 <= LOG_BRANCH_WINDOW {
            return Err(Error::Domain(
                "power_integral diverges at 0 for exponent <= -1",
            ));
        }
        return Ok(libm::pow(b, e1) / e1);
    }
    let log_ratio = libm::log(a / b);
    if libm::fabs(e1) < LOG_BRANCH_WINDOW {
        return Ok(-log_ratio);
    }
    // b^{e+1} - a^{e+1} = -b^{e+1} * expm1((e+1) ln(a/b)); avoids cancellation for a ≈ b
    Ok(-libm::pow(b, e1) * libm::expm1(e1 * log_ratio) / e1)
}

/// `∫_s^∞ t^{κ-2} / (1 + t^κ) dt`, evaluated as `∫_0^{1/s} du / (1 + u^κ)`.
pub fn tail_ratio_integral(s: f64, kappa: f64, tol: Tolerance) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain("tail_ratio_integral requires s > 0"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain("tail_ratio_integral requires kappa > 0"));
    }
    let upper = 1.0 / s;
    if kappa == 1.0 {
        return adaptive_quad(|u| 1.0 / (1.0 + u), 0.0, upper, tol);
    }
    if kappa == 2.0 {
        return adaptive_quad(|u| 1.0 / (1.0 + u * u), 0.0, upper, tol);
    }
    adaptive_quad(|u| 1.0 / (1.0 + libm::pow(u, kappa)), 0.0, upper, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_integral_examples() {
        assert_eq!(power_integral(1.0, 1.0, -2.0).unwrap(), 0.0);
        assert!((power_integral(0.25, 1.0, -2.0).unwrap() - 3.0).abs() < 1e-14);
        let v = power_integral(0.3, 1.0, -1.0).unwrap();
        assert!((v - libm::log(1.0 / 0.3)).abs() < 1e-15);
        assert!((v - 1.203973).abs() < 1e-6);
    }

    #[test]
    fn power_integral_log_window() {
        let near = power_integral(0.3, 1.0, -1.0 + 1e-13).unwrap();
        assert!((near - libm::log(1.0 / 0.3)).abs() < 1e-12);
        // just outside the window the power form is still accurate
        let outside = power_integral(0.3, 1.0, -1.0 + 1e-9).unwrap();
        assert!((outside - libm::log(1.0 / 0.3)).abs() < 1e-8);
    }

    #[test]
    fn power_integral_domain() {
        assert!(matches!(
            power_integral(0.0, 1.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            power_integral(0.0, 1.0, -2.5),
            Err(Error::Domain(_))
        ));
        assert!(power_integral(0.5, 0.4, 1.0).is_err());
        assert!((power_integral(0.0, 1.0, -0.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tail_ratio_examples() {
        let tol = Tolerance::DEFAULT;
        let far = tail_ratio_integral(1e12, 2.0, tol).unwrap();
        assert!((far - 1e-12).abs() < 1e-20);
        let k1 = tail_ratio_integral(1.0, 1.0, tol).unwrap();
        assert!((k1 - core::f64::consts::LN_2).abs() < 1e-10);
        let k2 = tail_ratio_integral(1.0, 2.0, tol).unwrap();
        assert!((k2 - core::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn tail_ratio_rejects_bad_args() {
        let tol = Tolerance::DEFAULT;
        assert!(tail_ratio_integral(0.0, 1.0, tol).is_err());
        assert!(tail_ratio_integral(1.0, -1.0, tol).is_err());
        assert!(tail_ratio_integral(-2.0, 1.0, tol).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-3, 10).is_err());
        assert!(Tolerance::new(1e-3, -1.0, 10).is_err());
        assert!(Tolerance::new(1e-3, 0.0, 0).is_err());
        let t = Tolerance::new(1e-3, 0.0, 1).unwrap();
        assert_eq!(t.max_iter(), 1);
        assert_eq!(Tolerance::default(), Tolerance::DEFAULT);
    }
}
