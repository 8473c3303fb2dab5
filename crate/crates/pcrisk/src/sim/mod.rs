//! Finite-sample Monte Carlo for PCR under `Σ = diag(j^{-κ})`.
//!
//! Every replicate owns a ChaCha8 stream derived from `(seed, replicate)`:
//! stream `2r` draws the design and stream `2r + 1` the `θ`/`w` samples, so
//! results do not depend on how rayon schedules the replicates.

mod pcr;
mod spectral;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub use pcr::{PcrSolver, RiskParts};
pub use spectral::{
    empirical_spectrum, empirical_stieltjes, stieltjes_replicates, tail_trace_bounds,
    wishart_trace_check, SpectrumReport, StieltjesEstimate, TraceSandwich,
};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("linear algebra failure: {0}")]
    LinAlg(String),
    #[error(transparent)]
    Core(#[from] pcrisk_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub big_n: usize,
    pub n: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub p_values: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    /// θ/w draws per design for the sampled oracle; 0 skips it.
    pub theta_draws: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        if self.n >= self.big_n {
            return fail(format!(
                "n = {} must be smaller than N = {}",
                self.n, self.big_n
            ));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return fail("kappa must be positive".into());
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return fail("sigma must be non-negative".into());
        }
        if let Some(p) = self.p_values.iter().find(|p| **p > self.big_n) {
            return fail(format!("p = {p} exceeds N = {}", self.big_n));
        }
        if self.replicates == 0 {
            return fail("replicates must be positive".into());
        }
        if self.theta_draws == 1 {
            return fail("theta draws must be 0 (skip) or at least 2".into());
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.n as f64 / self.big_n as f64
    }

    /// The p values sitting exactly on the interpolation threshold.
    pub fn threshold_ps(&self) -> Vec<usize> {
        self.p_values
            .iter()
            .copied()
            .filter(|p| *p == self.n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskEstimate {
    pub p: usize,
    pub mean: f64,
    pub stderr: f64,
    pub sampled_mean: Option<f64>,
    pub sampled_stderr: Option<f64>,
    /// Smallest SVD rank of `X_P` over replicates; only computed at `p = n`.
    pub effective_rank: Option<usize>,
}

/// `(1, 2^{-κ}, …, N^{-κ})`.
pub fn make_sigma(big_n: usize, kappa: f64) -> Vec<f64> {
    (1..=big_n).map(|j| (j as f64).powf(-kappa)).collect()
}

pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `G diag(√λ)` with `G` n×N standard normal.
pub fn gaussian_design<R: Rng + ?Sized>(n: usize, lambdas: &[f64], rng: &mut R) -> DMatrix<f64> {
    let scale: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let mut x = DMatrix::zeros(n, lambdas.len());
    for (j, mut col) in x.column_iter_mut().enumerate() {
        for v in col.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = scale[j] * g;
        }
    }
    x
}

pub fn sample_design(cfg: &SimConfig, replicate: u64) -> DMatrix<f64> {
    let mut rng = replicate_rng(cfg.seed, 2 * replicate);
    gaussian_design(cfg.n, &make_sigma(cfg.big_n, cfg.kappa), &mut rng)
}

pub fn pcr_fit(x: &DMatrix<f64>, y: &DVector<f64>, p: usize) -> Result<DVector<f64>, SimError> {
    PcrSolver::new(x, p)?.fit(y)
}

/// Exact `E_{w,θ}[Error | X]` under `θ ~ N(0, I)` and `w ~ N(0, σ²I)`.
pub fn conditional_risk(
    x: &DMatrix<f64>,
    p: usize,
    kappa: f64,
    sigma: f64,
) -> Result<f64, SimError> {
    PcrSolver::new(x, p)?.conditional_risk(&make_sigma(x.ncols(), kappa), sigma)
}

/// Direct sampling of θ and w; returns `(mean, stderr)` of
/// `Error = σ² + Σ_j λ_j (θ̂_j − θ_j)²`.
pub fn sampled_risk<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    p: usize,
    kappa: f64,
    sigma: f64,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64), SimError> {
    if draws < 2 {
        return Err(SimError::Config(
            "sampled risk needs at least 2 draws".into(),
        ));
    }
    let solver = PcrSolver::new(x, p)?;
    let lambdas = make_sigma(x.ncols(), kappa);
    sampled_with(&solver, x, &lambdas, sigma, draws, rng)
}

fn sampled_with<R: Rng + ?Sized>(
    solver: &PcrSolver<'_>,
    x: &DMatrix<f64>,
    lambdas: &[f64],
    sigma: f64,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64), SimError> {
    let (n, big_n) = x.shape();
    let mut errors = Vec::with_capacity(draws);
    for _ in 0..draws {
        let theta = DVector::from_fn(big_n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = DVector::from_fn(n, |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
        let y = x * &theta + w;
        let fit = solver.fit(&y)?;
        let err: f64 = lambdas
            .iter()
            .zip(fit.iter().zip(theta.iter()))
            .map(|(l, (a, b))| l * (a - b) * (a - b))
            .sum();
        errors.push(sigma * sigma + err);
    }
    Ok(mean_stderr(&errors))
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

struct ReplicateRow {
    risk: f64,
    sampled: Option<(f64, f64)>,
    rank: Option<usize>,
}

fn run_replicate(
    cfg: &SimConfig,
    lambdas: &[f64],
    index: u64,
) -> Vec<Result<ReplicateRow, SimError>> {
    let x = sample_design(cfg, index);
    let mut rng = replicate_rng(cfg.seed, 2 * index + 1);
    cfg.p_values
        .iter()
        .map(|&p| {
            let solver = PcrSolver::new(&x, p)?;
            let risk = solver.conditional_risk(lambdas, cfg.sigma)?;
            let sampled = if cfg.theta_draws > 0 {
                Some(sampled_with(
                    &solver,
                    &x,
                    lambdas,
                    cfg.sigma,
                    cfg.theta_draws,
                    &mut rng,
                )?)
            } else {
                None
            };
            Ok(ReplicateRow {
                risk,
                sampled,
                rank: solver.effective_rank(),
            })
        })
        .collect()
}

/// Average conditional risk per `p` over independent designs. Each entry
/// carries its own error so one failing `p` does not hide the others.
pub fn mc_curve(cfg: &SimConfig) -> Result<Vec<Result<RiskEstimate, SimError>>, SimError> {
    cfg.validate()?;
    let lambdas = make_sigma(cfg.big_n, cfg.kappa);
    let per_replicate: Vec<Vec<Result<ReplicateRow, SimError>>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(cfg, &lambdas, r))
        .collect();

    let mut columns: Vec<Vec<Result<ReplicateRow, SimError>>> = cfg
        .p_values
        .iter()
        .map(|_| Vec::with_capacity(cfg.replicates))
        .collect();
    for rows in per_replicate {
        for (k, row) in rows.into_iter().enumerate() {
            columns[k].push(row);
        }
    }
    Ok(cfg
        .p_values
        .iter()
        .zip(columns)
        .map(|(&p, rows)| {
            let rows: Vec<ReplicateRow> = rows.into_iter().collect::<Result<_, _>>()?;
            let risks: Vec<f64> = rows.iter().map(|r| r.risk).collect();
            let (mean, stderr) = mean_stderr(&risks);
            let (sampled_mean, sampled_stderr) = if cfg.theta_draws > 0 {
                let k = rows.len() as f64;
                let m = rows
                    .iter()
                    .map(|r| r.sampled.unwrap_or_default().0)
                    .sum::<f64>()
                    / k;
                let v = rows
                    .iter()
                    .map(|r| r.sampled.unwrap_or_default().1.powi(2))
                    .sum::<f64>();
                (Some(m), Some(v.sqrt() / k))
            } else {
                (None, None)
            };
            Ok(RiskEstimate {
                p,
                mean,
                stderr,
                sampled_mean,
                sampled_stderr,
                effective_rank: rows.iter().filter_map(|r| r.rank).min(),
            })
        })
        .collect())
}
