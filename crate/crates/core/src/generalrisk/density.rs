//! Limiting spectral densities `F = (1−δ)F₀ + δF₁` with an atom at zero.
//!
//! Only the continuous part `f` (density of `F₁`) ever enters an integral;
//! the atom constrains `β < δ` and nothing else.

use crate::error::{Error, Result};
use crate::numkernel::{adaptive_quad, power_integral, Tolerance};
use crate::polyrisk::QUAD_TOL;

/// The five evaluators every density family provides.
///
/// * `survival(ν) = ∫_ν^∞ f`
/// * `partial_moment(ν) = ∫_{η1}^ν t f(t) dt`
/// * `weighted_tail(s, ν) = ∫_ν^∞ t f(t)/(s+t) dt`
/// * `weighted_tail2(s, ν) = ∫_ν^∞ t f(t)/(s+t)² dt`
pub trait SpectralDensity {
    /// `(η1, η2)`; `η2` is `f64::INFINITY` for unbounded support.
    fn support(&self) -> (f64, f64);
    fn pdf(&self, t: f64) -> f64;
    fn survival(&self, nu: f64) -> Result<f64>;
    fn partial_moment(&self, nu: f64) -> Result<f64>;
    fn weighted_tail(&self, s: f64, nu: f64) -> Result<f64>;
    fn weighted_tail2(&self, s: f64, nu: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Limit of `N^κ λ_j` over the components `α₁N < j <= α₂N` under
    /// `λ_j = j^{-κ}`: density `s^{-1-1/κ} / (κ(α₂−α₁))` on
    /// `[α₂^{-κ}, α₁^{-κ}]` (unbounded when `α₁ = 0`).
    InversePoly {
        kappa: f64,
        alpha1: f64,
        alpha2: f64,
    },
    /// Constant density on `[η1, η2]`.
    Uniform,
    /// `a η1^a t^{-a-1}` on `[η1, ∞)`.
    Pareto { tail_index: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    delta: f64,
    eta1: f64,
    eta2: f64,
    family: Family,
}

/// Truncated power law `c t^{-a-1}` on `[η1, η2]`; shared by the inverse
/// polynomial and Pareto families.
#[derive(Debug, Clone, Copy)]
struct PowerLaw {
    a: f64,
    c: f64,
    eta1: f64,
    eta2: f64,
    /// `η2^{-a}` (zero for unbounded support)
    top: f64,
}

impl PowerLaw {
    fn new(a: f64, eta1: f64, eta2: f64) -> Self {
        let top = if eta2.is_finite() {
            libm::pow(eta2, -a)
        } else {
            0.0
        };
        let c = a / (libm::pow(eta1, -a) - top);
        Self {
            a,
            c,
            eta1,
            eta2,
            top,
        }
    }

    fn pdf(&self, t: f64) -> f64 {
        if t < self.eta1 || t > self.eta2 {
            0.0
        } else {
            self.c * libm::pow(t, -self.a - 1.0)
        }
    }

    fn survival(&self, nu: f64) -> f64 {
        if nu <= self.eta1 {
            1.0
        } else if nu >= self.eta2 {
            0.0
        } else {
            (self.c / self.a) * (libm::pow(nu, -self.a) - self.top)
        }
    }

    fn partial_moment(&self, nu: f64) -> Result<f64> {
        let nu = nu.clamp(self.eta1, self.eta2);
        if nu.is_infinite() {
            return if self.a > 1.0 {
                Ok(self.c * libm::pow(self.eta1, 1.0 - self.a) / (self.a - 1.0))
            } else {
                Ok(f64::INFINITY)
            };
        }
        Ok(self.c * power_integral(self.eta1, nu, -self.a)?)
    }

    /// `1/t` at survival level `v`: from `t^{-a} = η2^{-a} + a v / c`.
    fn inv_quantile(&self, v: f64) -> f64 {
        libm::pow(self.top + self.a * v / self.c, 1.0 / self.a)
    }

    /// `∫_ν^{η2} g(t) f(t) dt` rewritten as `∫_0^{S(ν)} g(t(v)) dv` with `g`
    /// given as a function of `w = 1/t`; bounded integrand on a finite range.
    fn tail_expectation<G: Fn(f64) -> f64>(&self, nu: f64, g: G) -> Result<f64> {
        let upper = self.survival(nu);
        adaptive_quad(|v| g(self.inv_quantile(v)), 0.0, upper, QUAD_TOL)
    }

    fn weighted_tail(&self, s: f64, nu: f64) -> Result<f64> {
        self.tail_expectation(nu, |w| 1.0 / (1.0 + s * w))
    }

    fn weighted_tail2(&self, s: f64, nu: f64) -> Result<f64> {
        self.tail_expectation(nu, |w| {
            let d = 1.0 + s * w;
            w / (d * d)
        })
    }
}

impl DensitySpec {
    fn check_delta(delta: f64) -> Result<()> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain("delta must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Inverse-polynomial law of the first `α₂N` components.
    pub fn inverse_poly(kappa: f64, alpha2: f64, delta: f64) -> Result<Self> {
        Self::inverse_poly_band(kappa, 0.0, alpha2, delta)
    }

    /// Inverse-polynomial law of the components `α₁N < j <= α₂N`.
    pub fn inverse_poly_band(kappa: f64, alpha1: f64, alpha2: f64, delta: f64) -> Result<Self> {
        Self::check_delta(delta)?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain("kappa must be positive"));
        }
        if !(alpha1 >= 0.0 && alpha1 < alpha2 && alpha2 <= 1.0) {
            return Err(Error::Domain(
                "inverse_poly requires 0 <= alpha1 < alpha2 <= 1",
            ));
        }
        let eta1 = libm::pow(alpha2, -kappa);
        let eta2 = if alpha1 == 0.0 {
            f64::INFINITY
        } else {
            libm::pow(alpha1, -kappa)
        };
        Ok(Self {
            delta,
            eta1,
            eta2,
            family: Family::InversePoly {
                kappa,
                alpha1,
                alpha2,
            },
        })
    }

    pub fn uniform(eta1: f64, eta2: f64, delta: f64) -> Result<Self> {
        Self::check_delta(delta)?;
        if !(eta1 > 0.0 && eta2 > eta1 && eta2.is_finite()) {
            return Err(Error::Domain("uniform requires 0 < eta1 < eta2 < inf"));
        }
        Ok(Self {
            delta,
            eta1,
            eta2,
            family: Family::Uniform,
        })
    }

    pub fn pareto(tail_index: f64, eta1: f64, delta: f64) -> Result<Self> {
        Self::check_delta(delta)?;
        if !(tail_index > 0.0) || !tail_index.is_finite() {
            return Err(Error::Domain("pareto tail_index must be positive"));
        }
        if !(eta1 > 0.0) || !eta1.is_finite() {
            return Err(Error::Domain("pareto requires 0 < eta1 < inf"));
        }
        Ok(Self {
            delta,
            eta1,
            eta2: f64::INFINITY,
            family: Family::Pareto { tail_index },
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn family(&self) -> Family {
        self.family
    }

    fn power_law(&self) -> Option<PowerLaw> {
        match self.family {
            Family::InversePoly { kappa, .. } => {
                Some(PowerLaw::new(1.0 / kappa, self.eta1, self.eta2))
            }
            Family::Pareto { tail_index } => Some(PowerLaw::new(tail_index, self.eta1, self.eta2)),
            Family::Uniform => None,
        }
    }

    /// Fraction of components with scaled eigenvalue `>= ν`: `δ·S(max(ν, η1))`.
    pub fn alpha_of_nu(&self, nu: f64) -> Result<f64> {
        if !(nu >= 0.0) {
            return Err(Error::Domain("nu must be non-negative"));
        }
        Ok(self.delta * self.survival(nu.max(self.eta1))?)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain("s must be positive and finite"));
    }
    Ok(())
}

impl SpectralDensity for DensitySpec {
    fn support(&self) -> (f64, f64) {
        (self.eta1, self.eta2)
    }

    fn pdf(&self, t: f64) -> f64 {
        match self.power_law() {
            Some(law) => law.pdf(t),
            None => {
                if t < self.eta1 || t > self.eta2 {
                    0.0
                } else {
                    1.0 / (self.eta2 - self.eta1)
                }
            }
        }
    }

    fn survival(&self, nu: f64) -> Result<f64> {
        if nu.is_nan() {
            return Err(Error::Domain("nu is NaN"));
        }
        Ok(match self.power_law() {
            Some(law) => law.survival(nu),
            None => ((self.eta2 - nu) / (self.eta2 - self.eta1)).clamp(0.0, 1.0),
        })
    }

    fn partial_moment(&self, nu: f64) -> Result<f64> {
        if nu.is_nan() {
            return Err(Error::Domain("nu is NaN"));
        }
        match self.power_law() {
            Some(law) => law.partial_moment(nu),
            None => {
                let nu = nu.clamp(self.eta1, self.eta2);
                Ok((nu * nu - self.eta1 * self.eta1) / (2.0 * (self.eta2 - self.eta1)))
            }
        }
    }

    fn weighted_tail(&self, s: f64, nu: f64) -> Result<f64> {
        check_s(s)?;
        let nu = nu.max(self.eta1);
        match self.power_law() {
            Some(law) => law.weighted_tail(s, nu),
            None => {
                if nu >= self.eta2 {
                    return Ok(0.0);
                }
                let len = self.eta2 - self.eta1;
                let log = libm::log1p((self.eta2 - nu) / (s + nu));
                Ok(((self.eta2 - nu) - s * log) / len)
            }
        }
    }

    fn weighted_tail2(&self, s: f64, nu: f64) -> Result<f64> {
        check_s(s)?;
        let nu = nu.max(self.eta1);
        match self.power_law() {
            Some(law) => law.weighted_tail2(s, nu),
            None => {
                if nu >= self.eta2 {
                    return Ok(0.0);
                }
                let len = self.eta2 - self.eta1;
                let log = libm::log1p((self.eta2 - nu) / (s + nu));
                Ok((log + s / (s + self.eta2) - s / (s + nu)) / len)
            }
        }
    }
}

/// Generic fallback: every evaluator by adaptive quadrature of `pdf`, with
/// `u = 1/t` for unbounded supports.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureDensity<'a, D: SpectralDensity> {
    inner: &'a D,
    tol: Tolerance,
}

impl<'a, D: SpectralDensity> QuadratureDensity<'a, D> {
    pub fn new(inner: &'a D, tol: Tolerance) -> Self {
        Self { inner, tol }
    }

    /// `∫_ν^{η2} g(t) dt`.
    fn tail<G: Fn(f64) -> f64>(&self, nu: f64, g: G) -> Result<f64> {
        let (eta1, eta2) = self.inner.support();
        let nu = nu.max(eta1);
        if nu >= eta2 {
            return Ok(0.0);
        }
        if eta2.is_finite() {
            adaptive_quad(g, nu, eta2, self.tol)
        } else {
            adaptive_quad(|u| g(1.0 / u) / (u * u), 0.0, 1.0 / nu, self.tol)
        }
    }
}

impl<D: SpectralDensity> SpectralDensity for QuadratureDensity<'_, D> {
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    fn pdf(&self, t: f64) -> f64 {
        self.inner.pdf(t)
    }

    fn survival(&self, nu: f64) -> Result<f64> {
        self.tail(nu, |t| self.inner.pdf(t))
    }

    fn partial_moment(&self, nu: f64) -> Result<f64> {
        let (eta1, eta2) = self.inner.support();
        let nu = nu.clamp(eta1, eta2);
        if nu.is_infinite() {
            let total = self.tail(eta1, |t| t * self.inner.pdf(t))?;
            return Ok(total);
        }
        adaptive_quad(|t| t * self.inner.pdf(t), eta1, nu, self.tol)
    }

    fn weighted_tail(&self, s: f64, nu: f64) -> Result<f64> {
        check_s(s)?;
        self.tail(nu, |t| t * self.inner.pdf(t) / (s + t))
    }

    fn weighted_tail2(&self, s: f64, nu: f64) -> Result<f64> {
        check_s(s)?;
        self.tail(nu, |t| {
            let d = s + t;
            t * self.inner.pdf(t) / (d * d)
        })
    }
}
