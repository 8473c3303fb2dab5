//! Asymptotic PCR risk under polynomial eigenvalue decay `λ_j = j^{-κ}`.
//!
//! The first `p` principal components are kept, `p/N → α` and `n/N → β`.
//! For `α < β` the risk has a closed form and a unique interior optimum
//! `α*`; for `α > β` it is expressed through the companion Stieltjes
//! transform `m(z)` at `z = 0`, which is obtained from the scalar equation
//! `q(s, α) = 0` with `m(0) = (α s*)^κ`.
//!
//! All risks carry the factor `N^{1-κ}`; with noise (`σ > 0`) the noise
//! variance `σ²` enters additively as described on each method.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkernel::{adaptive_quad, find_root, power_integral, tail_ratio_integral, Tolerance};

/// Quadrature accuracy used inside the analytic risk functions.
pub(crate) const QUAD_TOL: Tolerance = Tolerance::new_unchecked(1e-15, 1e-13, 4000);
/// Root-finding accuracy used inside the analytic risk functions.
pub(crate) const ROOT_TOL: Tolerance = Tolerance::new_unchecked(1e-15, 1e-15, 400);

const ALPHA_STAR_START: f64 = 1e-3;
const ALPHA_STAR_SHRINKS: usize = 60;
const BRACKET_STEPS: usize = 200;

/// Polynomial-decay problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyModel {
    kappa: f64,
    beta: f64,
    big_n: u64,
    sigma: f64,
}

/// Companion fixed point at `z = 0` for a given `α > β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    /// Unique positive root of `q(·, α)`.
    pub s_star: f64,
    /// `m(0) = (α s*)^κ`.
    pub m0: f64,
    /// `m'(0)`.
    pub m0_prime: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `α < β`: fewer components than samples.
    Under,
    /// `α > β`: minimum-norm interpolation.
    Over,
    /// Inside the band around `α = β` where the asymptotic risk diverges.
    Excluded,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Under => "Under",
            Regime::Over => "Over",
            Regime::Excluded => "Excluded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPoint {
    pub alpha: f64,
    /// `None` for excluded points.
    pub risk: Option<f64>,
    pub regime: Regime,
}

/// Which choice of `α` attains the smaller asymptotic risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// `R(1) < R(α*)`: keeping every component and interpolating wins.
    InterpolationWins,
    /// `R(α*) <= R(1)`.
    UnderparameterizedWins,
    /// Noise dominates (`σ > 0`, `κ > 1`): the minimum `σ²` sits at `α = 0`.
    NoiseFloorAtZero { min_risk: f64 },
}

/// Summary of the `p < n` optimum against `p = N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub alpha_star: f64,
    pub risk_at_alpha_star: f64,
    pub risk_at_one: f64,
    /// Fixed point at `α = 1`; `s_star` there equals `m(0)^{1/κ}`.
    pub at_one: FixedPoint,
    pub verdict: Verdict,
}

impl Comparison {
    pub fn s_star(&self) -> f64 {
        self.at_one.s_star
    }
}

impl PolyModel {
    pub fn new(kappa: f64, beta: f64, big_n: u64, sigma: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain("kappa must be positive"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Domain("beta must lie in (0, 1)"));
        }
        if big_n == 0 {
            return Err(Error::Domain("N must be at least 1"));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain("sigma must be non-negative"));
        }
        Ok(Self {
            kappa,
            beta,
            big_n,
            sigma,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn big_n(&self) -> u64 {
        self.big_n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Same model with a different ambient dimension.
    pub fn with_big_n(&self, big_n: u64) -> Result<Self> {
        Self::new(self.kappa, self.beta, big_n, self.sigma)
    }

    /// Same model with a different noise level.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.kappa, self.beta, self.big_n, sigma)
    }

    /// `N^{1-κ}`.
    pub fn scale(&self) -> f64 {
        libm::pow(self.big_n as f64, 1.0 - self.kappa)
    }

    fn noise_var(&self) -> f64 {
        self.sigma * self.sigma
    }

    fn check_over(&self, alpha: f64) -> Result<()> {
        if !(alpha > self.beta && alpha <= 1.0) {
            return Err(Error::Domain(
                "over-parameterized regime requires beta < alpha <= 1",
            ));
        }
        Ok(())
    }

    /// `h(α) = β/α − ∫_α^1 t^{κ−2} dt − 1 − σ²·[κ = 1]`, whose unique root on
    /// `(0, β)` is the risk-optimal `α*`.
    pub fn h(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= self.beta) {
            return Err(Error::Domain("h requires 0 < alpha <= beta"));
        }
        let noise = if self.kappa == 1.0 {
            self.noise_var()
        } else {
            0.0
        };
        Ok(self.beta / alpha - power_integral(alpha, 1.0, self.kappa - 2.0)? - 1.0 - noise)
    }

    /// Minimizer of the `p < n` risk over `α ∈ [0, β)`.
    ///
    /// With noise and `κ > 1` the minimum sits at `α = 0`. Otherwise it is the
    /// root of [`h`](Self::h); the left end of the bracket is shrunk from
    /// `1e-3` until `h > 0` there, the right end is `β` where `h < 0`.
    pub fn alpha_star(&self) -> Result<f64> {
        if self.sigma > 0.0 && self.kappa > 1.0 {
            return Ok(0.0);
        }
        let mut lo = ALPHA_STAR_START.min(0.5 * self.beta);
        let mut found = false;
        for _ in 0..ALPHA_STAR_SHRINKS {
            if self.h(lo)? > 0.0 {
                found = true;
                break;
            }
            lo *= 0.1;
        }
        if !found {
            return Err(Error::Solver("could not bracket alpha* from the left"));
        }
        // h is only evaluated inside (0, β] by the root finder
        let mut err = None;
        let root = find_root(
            |a| match self.h(a) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            lo,
            self.beta,
            ROOT_TOL,
        );
        match (root, err) {
            (_, Some(e)) => Err(e),
            (r, None) => r,
        }
    }

    /// `∫_α^1 t^{-κ} dt` with the `α = 0` convention: `0` for `κ > 1`
    /// (vanishing tail when `p = o(N)`), `1/(1−κ)` for `κ < 1`, rejected for
    /// `κ = 1`.
    fn misspecification(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            if self.kappa > 1.0 {
                return Ok(0.0);
            }
            if self.kappa == 1.0 {
                return Err(Error::Domain(
                    "alpha = 0 is undefined for kappa = 1 (logarithmic tail)",
                ));
            }
        }
        power_integral(alpha, 1.0, -self.kappa)
    }

    /// Risk for `0 <= α < β`: `(N^{1−κ}∫_α^1 t^{−κ} dt + σ²)·β/(β−α)`.
    pub fn risk_under(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0 && alpha < self.beta) {
            return Err(Error::Domain("risk_under requires 0 <= alpha < beta"));
        }
        let tail = self.misspecification(alpha)?;
        Ok((self.scale() * tail + self.noise_var()) * self.beta / (self.beta - alpha))
    }

    /// `q(s, α) = β/s − α ∫_s^∞ t^{κ−2}/(1+t^κ) dt` for `β < α <= 1`.
    pub fn q(&self, s: f64, alpha: f64) -> Result<f64> {
        self.check_over(alpha)?;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain("q requires s > 0"));
        }
        Ok(self.beta / s - alpha * tail_ratio_integral(s, self.kappa, QUAD_TOL)?)
    }

    /// Stationary point `(β/(α−β))^{1/κ}` of `q(·, α)`: `q` decreases before it
    /// and increases towards `0⁻` after it.
    fn q_minimizer(&self, alpha: f64) -> f64 {
        libm::pow(self.beta / (alpha - self.beta), 1.0 / self.kappa)
    }

    /// Solves `q(s, α) = 0` and derives `m(0)` and `m'(0)`.
    pub fn fixed_point(&self, alpha: f64) -> Result<FixedPoint> {
        self.check_over(alpha)?;
        let s_hi = self.q_minimizer(alpha);
        if self.q(s_hi, alpha)? >= 0.0 {
            return Err(Error::Solver("q is not negative at its stationary point"));
        }
        let mut s_lo = 0.5 * s_hi;
        let mut found = false;
        for _ in 0..BRACKET_STEPS {
            if self.q(s_lo, alpha)? > 0.0 {
                found = true;
                break;
            }
            s_lo *= 0.5;
        }
        if !found {
            return Err(Error::Solver("could not bracket s* from the left"));
        }
        let mut err = None;
        let s_star = find_root(
            |s| {
                self.q(s, alpha).unwrap_or_else(|e| {
                    err = Some(e);
                    f64::NAN
                })
            },
            s_lo,
            s_hi,
            ROOT_TOL,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let s_star = s_star?;
        let sk = libm::pow(s_star, self.kappa);
        let m0 = libm::pow(alpha * s_star, self.kappa);
        let m0_prime =
            self.kappa * self.beta * m0 * m0 * (1.0 + sk) / (self.beta + (self.beta - alpha) * sk);
        Ok(FixedPoint {
            s_star,
            m0,
            m0_prime,
            alpha,
        })
    }

    /// Residual of the companion equation
    /// `−z = 1/m − (1/β)∫_{α^{−κ}}^∞ dt / (κ t^{1/κ}(1 + t m))`, returned as
    /// `1/m − (1/β)∫… + z`.
    ///
    /// The integral is computed independently of `q` via `t = α^{−κ} v^{−κ}`,
    /// which maps it to `α^{1−κ}∫_0^1 dv / (v^κ + α^{−κ} m)`.
    pub fn companion_residual(&self, alpha: f64, m: f64, z: f64) -> Result<f64> {
        self.check_over(alpha)?;
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Domain("companion residual requires m > 0"));
        }
        let k = self.kappa;
        let am = libm::pow(alpha, -k) * m;
        let integral = if k == 1.0 {
            adaptive_quad(|v| 1.0 / (v + am), 0.0, 1.0, QUAD_TOL)?
        } else if k == 2.0 {
            adaptive_quad(|v| 1.0 / (v * v + am), 0.0, 1.0, QUAD_TOL)?
        } else {
            adaptive_quad(|v| 1.0 / (libm::pow(v, k) + am), 0.0, 1.0, QUAD_TOL)?
        };
        Ok(1.0 / m - libm::pow(alpha, 1.0 - k) * integral / self.beta + z)
    }

    /// Smallest positive solution `m(z)` of the companion equation for `z <= 0`,
    /// solved directly in `m` (not through `q`).
    pub fn stieltjes_at(&self, alpha: f64, z: f64) -> Result<f64> {
        self.check_over(alpha)?;
        if !(z <= 0.0) || !z.is_finite() {
            return Err(Error::Domain("stieltjes_at requires z <= 0"));
        }
        let m_hi = libm::pow(alpha * self.q_minimizer(alpha), self.kappa);
        if self.companion_residual(alpha, m_hi, z)? >= 0.0 {
            return Err(Error::Solver(
                "companion residual is not negative at the upper bracket",
            ));
        }
        let mut m_lo = 0.5 * m_hi;
        let mut found = false;
        for _ in 0..BRACKET_STEPS {
            if self.companion_residual(alpha, m_lo, z)? > 0.0 {
                found = true;
                break;
            }
            m_lo *= 0.5;
        }
        if !found {
            return Err(Error::Solver("could not bracket m(z) from the left"));
        }
        let mut err = None;
        let m = find_root(
            |m| {
                self.companion_residual(alpha, m, z).unwrap_or_else(|e| {
                    err = Some(e);
                    f64::NAN
                })
            },
            m_lo,
            m_hi,
            ROOT_TOL,
        );
        if let Some(e) = err {
            return Err(e);
        }
        m
    }

    /// Risk for `β < α <= 1`:
    /// `N^{1−κ}β/m(0) + (N^{1−κ}∫_α^1 t^{−κ} dt + σ²)·m'(0)/m(0)²`.
    pub fn risk_over(&self, alpha: f64) -> Result<f64> {
        let fp = self.fixed_point(alpha)?;
        Ok(self.risk_over_with(&fp))
    }

    /// [`risk_over`](Self::risk_over) for an already solved fixed point.
    pub fn risk_over_with(&self, fp: &FixedPoint) -> f64 {
        let scale = self.scale();
        let tail = power_integral(fp.alpha, 1.0, -self.kappa).unwrap_or(0.0);
        scale * self.beta / fp.m0
            + (scale * tail + self.noise_var()) * fp.m0_prime / (fp.m0 * fp.m0)
    }

    /// Asymptotic risk at any `α ∈ [0, 1]` away from `α = β`.
    pub fn risk(&self, alpha: f64) -> Result<f64> {
        if alpha < self.beta {
            self.risk_under(alpha)
        } else {
            self.risk_over(alpha)
        }
    }

    /// Best `p < n` choice against `p = N`.
    pub fn compare(&self) -> Result<Comparison> {
        let at_one = self.fixed_point(1.0)?;
        let risk_at_one = self.risk_over_with(&at_one);
        if self.sigma > 0.0 && self.kappa > 1.0 {
            let floor = self.noise_var();
            return Ok(Comparison {
                alpha_star: 0.0,
                risk_at_alpha_star: floor,
                risk_at_one,
                at_one,
                verdict: Verdict::NoiseFloorAtZero { min_risk: floor },
            });
        }
        let alpha_star = self.alpha_star()?;
        let risk_at_alpha_star = self.risk_under(alpha_star)?;
        let verdict = if risk_at_one < risk_at_alpha_star {
            Verdict::InterpolationWins
        } else {
            Verdict::UnderparameterizedWins
        };
        Ok(Comparison {
            alpha_star,
            risk_at_alpha_star,
            risk_at_one,
            at_one,
            verdict,
        })
    }

    /// Risk on a grid of `α ∈ [0, 1]`, sorted by `α`. Points with
    /// `|α − β| < exclusion` are marked [`Regime::Excluded`].
    pub fn risk_curve(&self, alpha_grid: &[f64], exclusion: f64) -> Result<Vec<RiskPoint>> {
        if !(exclusion > 0.0) {
            return Err(Error::Domain("exclusion must be positive"));
        }
        if alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Domain("alpha grid values must lie in [0, 1]"));
        }
        let mut grid: Vec<f64> = alpha_grid.to_vec();
        grid.sort_by(f64::total_cmp);
        grid.into_iter()
            .map(|alpha| {
                if libm::fabs(alpha - self.beta) < exclusion {
                    Ok(RiskPoint {
                        alpha,
                        risk: None,
                        regime: Regime::Excluded,
                    })
                } else if alpha < self.beta {
                    Ok(RiskPoint {
                        alpha,
                        risk: Some(self.risk_under(alpha)?),
                        regime: Regime::Under,
                    })
                } else {
                    Ok(RiskPoint {
                        alpha,
                        risk: Some(self.risk_over(alpha)?),
                        regime: Regime::Over,
                    })
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(kappa: f64, sigma: f64) -> PolyModel {
        PolyModel::new(kappa, 0.3, 1000, sigma).unwrap()
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(PolyModel::new(0.0, 0.3, 10, 0.0).is_err());
        assert!(PolyModel::new(1.0, 1.0, 10, 0.0).is_err());
        assert!(PolyModel::new(1.0, 0.0, 10, 0.0).is_err());
        assert!(PolyModel::new(1.0, 0.3, 0, 0.0).is_err());
        assert!(PolyModel::new(1.0, 0.3, 10, -1.0).is_err());
    }

    #[test]
    fn h_examples() {
        assert!((model(2.0, 0.0).h(0.3).unwrap() + 0.7).abs() < 1e-14);
        let root = 1.0 - libm::sqrt(0.7);
        assert!(model(2.0, 0.0).h(root).unwrap().abs() < 1e-14);
        let v = model(1.0, 0.0).h(0.3).unwrap();
        assert!((v - libm::log(0.3)).abs() < 1e-14);
        assert!((v + 1.203973).abs() < 1e-6);
    }

    #[test]
    fn h_noise_only_enters_at_kappa_one() {
        let a = 0.2;
        let quiet = model(1.0, 0.0).h(a).unwrap();
        let noisy = model(1.0, 0.5).h(a).unwrap();
        assert!((quiet - noisy - 0.25).abs() < 1e-14);
        let quiet = model(0.5, 0.0).h(a).unwrap();
        let noisy = model(0.5, 0.5).h(a).unwrap();
        assert_eq!(quiet, noisy);
    }

    #[test]
    fn h_domain() {
        let m = model(2.0, 0.0);
        assert!(m.h(0.0).is_err());
        assert!(m.h(0.31).is_err());
    }

    #[test]
    fn risk_under_domain() {
        let m = model(1.0, 0.0);
        assert!(m.risk_under(0.3).is_err());
        assert!(m.risk_under(0.0).is_err());
        assert!(m.risk_under(-0.1).is_err());
        // κ < 1 at α = 0 is the convergent 1/(1−κ)
        let m = PolyModel::new(0.5, 0.3, 100, 0.0).unwrap();
        assert!((m.risk_under(0.0).unwrap() - 10.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn risk_examples() {
        let m = model(1.0, 0.0);
        let v = m.risk_under(0.1).unwrap();
        assert!((v - libm::log(10.0) * 1.5).abs() < 1e-12);
        assert!((v - 3.453878).abs() < 1e-6);
        let noisy = model(2.0, 1.0);
        assert!((noisy.risk_under(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(model(2.0, 0.0).risk_over(0.3).is_err());
    }

    #[test]
    fn q_examples() {
        let m = model(2.0, 0.0);
        let v = m.q(1.0, 1.0).unwrap();
        assert!((v - (0.3 - core::f64::consts::FRAC_PI_4)).abs() < 1e-12);
        let far = m.q(1e9, 1.0).unwrap();
        assert!(far < 0.0 && far.abs() < 1e-8);
        let v = model(1.0, 0.0).q(0.2, 1.0).unwrap();
        assert!((v - (1.5 - libm::log(6.0))).abs() < 1e-12);
        assert!(m.q(1.0, 0.3).is_err());
        assert!(m.q(0.0, 1.0).is_err());
    }

    #[test]
    fn curve_excludes_threshold() {
        let m = model(2.0, 0.0);
        let pts = m.risk_curve(&[0.3], 0.01).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].regime, Regime::Excluded);
        assert!(pts[0].risk.is_none());
        assert!(m.risk_curve(&[1.2], 0.01).is_err());
        assert!(m.risk_curve(&[0.5], 0.0).is_err());
    }

    #[test]
    fn curve_is_sorted() {
        let m = model(2.0, 0.0);
        let pts = m.risk_curve(&[1.0, 0.1, 0.6, 0.2], 0.01).unwrap();
        let alphas: Vec<f64> = pts.iter().map(|p| p.alpha).collect();
        assert_eq!(alphas, [0.1, 0.2, 0.6, 1.0]);
        assert_eq!(pts[0].regime, Regime::Under);
        assert_eq!(pts[3].regime, Regime::Over);
    }

    #[test]
    fn noisy_high_kappa_floor() {
        let m = model(2.0, 1.0);
        assert_eq!(m.alpha_star().unwrap(), 0.0);
        let cmp = m.compare().unwrap();
        assert_eq!(cmp.verdict, Verdict::NoiseFloorAtZero { min_risk: 1.0 });
    }
}
