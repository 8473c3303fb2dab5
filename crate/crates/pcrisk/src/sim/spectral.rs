//! Empirical spectral checks: deterministic CDF distance, companion
//! Stieltjes transform at zero, Wishart traces and tail-sum bounds.

use nalgebra::DMatrix;
use pcrisk_core::numkernel::power_integral;
use rand::Rng;
use rayon::prelude::*;

use super::{gaussian_design, sample_design, SimConfig, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumReport {
    pub p: usize,
    pub ks_distance: f64,
}

/// Sup distance between the empirical CDF of `{N^κ j^{-κ}}_{j<=p}` and its
/// limit law, whose survival is `min(1, t^{-1/κ}/α)` with `α = p/N`.
pub fn empirical_spectrum(p: usize, big_n: usize, kappa: f64) -> Result<SpectrumReport, SimError> {
    if p == 0 || p > big_n {
        return Err(SimError::Config(format!("p must lie in [1, N], got {p}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(SimError::Config("kappa must be positive".into()));
    }
    let alpha = p as f64 / big_n as f64;
    let cdf = |t: f64| 1.0 - (t.powf(-1.0 / kappa) / alpha).min(1.0);
    let pf = p as f64;
    // ascending order is j = p, p−1, …, 1
    let ks_distance = (1..=p)
        .map(|i| {
            let j = p + 1 - i;
            let t = (big_n as f64 / j as f64).powf(kappa);
            let f = cdf(t);
            (i as f64 / pf - f).max(f - (i - 1) as f64 / pf)
        })
        .fold(0.0f64, f64::max);
    Ok(SpectrumReport { p, ks_distance })
}

/// Eigenvalues of `(N^κ/n) X_P X_Pᵀ` and the transforms built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesEstimate {
    pub eigenvalues: Vec<f64>,
}

impl StieltjesEstimate {
    /// `(m_n(z), m_n'(z))` for `z` below the spectrum.
    pub fn at(&self, z: f64) -> (f64, f64) {
        let k = self.eigenvalues.len() as f64;
        let (m, mp) = self.eigenvalues.iter().fold((0.0, 0.0), |(m, mp), l| {
            let r = 1.0 / (l - z);
            (m + r, mp + r * r)
        });
        (m / k, mp / k)
    }

    pub fn m_hat(&self) -> f64 {
        self.at(0.0).0
    }

    pub fn m_prime_hat(&self) -> f64 {
        self.at(0.0).1
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }
}

pub fn empirical_stieltjes(
    x: &DMatrix<f64>,
    p: usize,
    kappa: f64,
) -> Result<StieltjesEstimate, SimError> {
    let (n, big_n) = x.shape();
    if p <= n || p > big_n {
        return Err(SimError::Config(format!(
            "stieltjes needs n < p <= N, got p = {p}, n = {n}"
        )));
    }
    let xp = x.columns(0, p);
    let gram = (xp * xp.transpose()) * ((big_n as f64).powf(kappa) / n as f64);
    let eigenvalues: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    if eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(SimError::LinAlg("non-positive sample eigenvalue".into()));
    }
    Ok(StieltjesEstimate { eigenvalues })
}

/// One estimate per replicate design, in replicate order.
pub fn stieltjes_replicates(cfg: &SimConfig, p: usize) -> Result<Vec<StieltjesEstimate>, SimError> {
    cfg.validate()?;
    (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| empirical_stieltjes(&sample_design(cfg, r), p, cfg.kappa))
        .collect()
}

/// `((n/p) tr W^{-1}, (n²/p) tr W^{-2})` for `W = X̄ᵀX̄`, `X̄` n×p standard normal.
pub fn wishart_trace_check<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<(f64, f64), SimError> {
    if p == 0 || p >= n {
        return Err(SimError::Config(format!(
            "wishart check needs 0 < p < n, got p = {p}, n = {n}"
        )));
    }
    let xbar = gaussian_design(n, &vec![1.0; p], rng);
    let w = xbar.transpose() * &xbar;
    let inv = w
        .cholesky()
        .ok_or_else(|| SimError::LinAlg("Wishart matrix is not positive definite".into()))?
        .inverse();
    let (nf, pf) = (n as f64, p as f64);
    Ok((nf / pf * inv.trace(), nf * nf / pf * inv.norm_squared()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSandwich {
    /// `(1/N) ∫_{p+1}^N N^κ t^{-κ} dt`
    pub lower: f64,
    /// `N^{κ−1} Σ_{j>p} j^{-κ}`
    pub exact: f64,
    /// `(1/N) ∫_p^N N^κ t^{-κ} dt`
    pub upper: f64,
}

impl TraceSandwich {
    pub fn holds(&self) -> bool {
        self.lower < self.exact && self.exact < self.upper
    }
}

pub fn tail_trace_bounds(big_n: usize, kappa: f64, p: usize) -> Result<TraceSandwich, SimError> {
    if p == 0 || p + 1 >= big_n {
        return Err(SimError::Config(format!(
            "trace bounds need 1 <= p < N − 1, got p = {p}"
        )));
    }
    let nf = big_n as f64;
    let scale = nf.powf(kappa - 1.0);
    let exact = scale
        * ((p + 1)..=big_n)
            .map(|j| (j as f64).powf(-kappa))
            .sum::<f64>();
    let lower = scale * power_integral((p + 1) as f64, nf, -kappa)?;
    let upper = scale * power_integral(p as f64, nf, -kappa)?;
    Ok(TraceSandwich {
        lower,
        exact,
        upper,
    })
}
