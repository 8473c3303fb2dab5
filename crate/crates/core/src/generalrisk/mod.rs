//! Asymptotic PCR risk under a general limiting spectral law.
//!
//! The eigenvalues of `c_N Σ` converge to `F = (1−δ)F₀ + δF₁`, where `F₀`
//! is an atom at zero and `F₁` has density `f` on `[η1, η2]`. Components with
//! `c_N λ_j >= ν` are kept, so `p/N → α(ν) = δ S(ν)`. The threshold `ν_b`
//! with `α(ν_b) = β` separates the `p < n` side (`ν > ν_b`) from the
//! interpolating side (`ν < ν_b`).

mod density;

pub use density::{DensitySpec, Family, QuadratureDensity, SpectralDensity};

use crate::error::{Error, Result};
use crate::numkernel::find_root;
use crate::polyrisk::ROOT_TOL;

const MAX_DOUBLINGS: usize = 200;
/// `ν*` search gives up (and reports the `ν → ∞` limit) beyond `2^40 η1`.
const NU_CAP_DOUBLINGS: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralModel {
    spec: DensitySpec,
    beta: f64,
    big_n: u64,
    c_n: f64,
    sigma: f64,
    nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralFixedPoint {
    /// Unique root of `q_f(·, ν)`; equals `1/m_f(0)`.
    pub s_star_f: f64,
    pub nu: f64,
}

/// Minimum of the `p < n` risk over `ν ∈ (ν_b, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnderOptimum {
    /// `h_f(ν*) = 0` inside the support; minimum risk `(Nβ/c_N) ν*`.
    Root { nu_star: f64, min_risk: f64 },
    /// `h_f < 0` throughout; the infimum is the `ν → ∞` limit
    /// `(N/c_N) δ ∫ t f(t) dt`.
    AtInfinity { min_risk: f64 },
}

impl UnderOptimum {
    pub fn min_risk(&self) -> f64 {
        match *self {
            UnderOptimum::Root { min_risk, .. } | UnderOptimum::AtInfinity { min_risk } => min_risk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralComparison {
    /// `R_f(η1, 0)`: all `δN` positive-eigenvalue components kept.
    pub risk_at_eta1: f64,
    pub s_star_at_eta1: f64,
    pub best_under: UnderOptimum,
    /// `risk_at_eta1 < best_under.min_risk()`.
    pub interpolation_wins: bool,
}

impl GeneralModel {
    pub fn new(
        spec: DensitySpec,
        beta: f64,
        big_n: u64,
        c_n: f64,
        sigma: f64,
        nu: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta < spec.delta()) {
            return Err(Error::Domain("beta must lie in (0, delta)"));
        }
        if big_n == 0 {
            return Err(Error::Domain("N must be at least 1"));
        }
        if !(c_n > 0.0) || !c_n.is_finite() {
            return Err(Error::Domain("c_N must be positive"));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain("sigma must be non-negative"));
        }
        if !(nu >= 0.0) || nu.is_nan() {
            return Err(Error::Domain("nu must be non-negative"));
        }
        Ok(Self {
            spec,
            beta,
            big_n,
            c_n,
            sigma,
            nu,
        })
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        Self::new(self.spec, self.beta, self.big_n, self.c_n, self.sigma, nu)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.spec, self.beta, self.big_n, self.c_n, sigma, self.nu)
    }

    pub fn spec(&self) -> &DensitySpec {
        &self.spec
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `N / c_N`.
    pub fn scale(&self) -> f64 {
        self.big_n as f64 / self.c_n
    }

    /// `ν = 0` selects every positive-eigenvalue component, i.e. `ν = η1`.
    fn effective_nu(&self) -> f64 {
        self.nu.max(self.spec.eta1())
    }

    fn delta(&self) -> f64 {
        self.spec.delta()
    }

    pub fn alpha(&self) -> Result<f64> {
        self.spec.alpha_of_nu(self.nu)
    }

    /// Threshold `ν_b` with `δ S(ν_b) = β`.
    pub fn nu_b(&self) -> Result<f64> {
        let (eta1, eta2) = self.spec.support();
        let gap = |nu: f64| -> f64 {
            self.delta() * self.spec.survival(nu).unwrap_or(f64::NAN) - self.beta
        };
        let hi = if eta2.is_finite() {
            eta2
        } else {
            let mut hi = 2.0 * eta1;
            let mut found = false;
            for _ in 0..MAX_DOUBLINGS {
                if gap(hi) < 0.0 {
                    found = true;
                    break;
                }
                hi *= 2.0;
            }
            if !found {
                return Err(Error::Solver("could not bracket nu_b"));
            }
            hi
        };
        find_root(gap, eta1, hi, ROOT_TOL)
    }

    /// `h_f(ν) = νβ − νδ S(ν) − δ M(ν)`; strictly increasing on `(ν_b, η2)`.
    pub fn h(&self, nu: f64) -> Result<f64> {
        if !(nu >= self.spec.eta1()) {
            return Err(Error::Domain("h_f requires nu >= eta1"));
        }
        let d = self.delta();
        Ok(nu * self.beta - nu * d * self.spec.survival(nu)? - d * self.spec.partial_moment(nu)?)
    }

    /// Minimizer of the noiseless `p < n` risk over `ν ∈ (ν_b, ∞]`.
    pub fn nu_star(&self) -> Result<UnderOptimum> {
        if self.sigma != 0.0 {
            return Err(Error::Domain("nu_star is defined for the noiseless model"));
        }
        let nu_b = self.nu_b()?;
        let (eta1, eta2) = self.spec.support();
        let h = |nu: f64| self.h(nu).unwrap_or(f64::NAN);
        if h(nu_b) >= 0.0 {
            return Err(Error::Solver("h_f is not negative at nu_b"));
        }
        let cap = eta1 * libm::ldexp(1.0, NU_CAP_DOUBLINGS);
        let mut hi = (2.0 * nu_b).min(eta2).min(cap);
        loop {
            let h_hi = h(hi);
            if h_hi.is_nan() {
                return Err(Error::Solver("h_f is not finite on the search bracket"));
            }
            if h_hi >= 0.0 {
                let nu_star = find_root(h, nu_b, hi, ROOT_TOL)?;
                return Ok(UnderOptimum::Root {
                    nu_star,
                    min_risk: self.scale() * self.beta * nu_star,
                });
            }
            if hi >= eta2 || hi >= cap {
                break;
            }
            hi = (2.0 * hi).min(eta2).min(cap);
        }
        let total = self.spec.partial_moment(f64::INFINITY)?;
        Ok(UnderOptimum::AtInfinity {
            min_risk: self.scale() * self.delta() * total,
        })
    }

    /// `((N/c_N) δ M(ν) + σ²) β / (β − δ S(ν))` for `ν > ν_b`.
    pub fn risk_under(&self) -> Result<f64> {
        let nu = self.effective_nu();
        let d = self.delta();
        let denom = self.beta - d * self.spec.survival(nu)?;
        if !(denom > 0.0) {
            return Err(Error::Domain("risk_under requires nu > nu_b"));
        }
        let m = self.spec.partial_moment(nu)?;
        Ok((self.scale() * d * m + self.sigma * self.sigma) * self.beta / denom)
    }

    fn check_over(&self) -> Result<f64> {
        let nu = self.effective_nu();
        if !(self.delta() * self.spec.survival(nu)? > self.beta) {
            return Err(Error::Domain(
                "over-parameterized regime requires nu < nu_b",
            ));
        }
        Ok(nu)
    }

    /// `q_f(s, ν) = sβ − sδ T1(s, ν)` for `ν < ν_b`.
    pub fn q(&self, s: f64) -> Result<f64> {
        let nu = self.check_over()?;
        Ok(s * (self.beta - self.delta() * self.spec.weighted_tail(s, nu)?))
    }

    /// Unique root of `q_f(s)/s = β − δ T1(s, ν)`, which increases in `s`
    /// from `β − δ S(ν) < 0` to `β`.
    pub fn fixed_point(&self) -> Result<GeneralFixedPoint> {
        let nu = self.check_over()?;
        let g =
            |s: f64| self.beta - self.delta() * self.spec.weighted_tail(s, nu).unwrap_or(f64::NAN);
        let mut lo = 1.0;
        let mut found = false;
        for _ in 0..MAX_DOUBLINGS {
            if g(lo) < 0.0 {
                found = true;
                break;
            }
            lo *= 0.5;
        }
        if !found {
            return Err(Error::Solver("could not bracket s*_f from below"));
        }
        let mut hi = 1.0;
        found = false;
        for _ in 0..MAX_DOUBLINGS {
            if g(hi) > 0.0 {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if !found {
            return Err(Error::Solver("could not bracket s*_f from above"));
        }
        let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let s_star_f = find_root(g, lo, hi, ROOT_TOL)?;
        Ok(GeneralFixedPoint { s_star_f, nu })
    }

    /// `(Nβ/c_N) s* + β((N/c_N) δ M(ν) + σ²) / (δ s* T2(s*, ν))` for `ν < ν_b`.
    pub fn risk_over(&self) -> Result<f64> {
        let fp = self.fixed_point()?;
        let d = self.delta();
        let s = fp.s_star_f;
        let t2 = self.spec.weighted_tail2(s, fp.nu)?;
        let m = self.spec.partial_moment(fp.nu)?;
        Ok(self.scale() * self.beta * s
            + self.beta * (self.scale() * d * m + self.sigma * self.sigma) / (d * s * t2))
    }

    /// Risk on whichever side of `ν_b` the model's `ν` lies.
    pub fn risk(&self) -> Result<f64> {
        let alpha = self.alpha()?;
        if alpha < self.beta {
            self.risk_under()
        } else {
            self.risk_over()
        }
    }

    /// `R_f(η1, 0)` against the best `p < n` risk.
    pub fn compare(&self) -> Result<GeneralComparison> {
        if self.sigma != 0.0 {
            return Err(Error::Domain("compare is defined for the noiseless model"));
        }
        let full = self.with_nu(self.spec.eta1())?;
        let fp = full.fixed_point()?;
        let risk_at_eta1 = full.risk_over()?;
        let best_under = self.nu_star()?;
        Ok(GeneralComparison {
            risk_at_eta1,
            s_star_at_eta1: fp.s_star_f,
            best_under,
            interpolation_wins: risk_at_eta1 < best_under.min_risk(),
        })
    }
}
