//! PCR fit and exact conditional risk for a fixed design.

use nalgebra::{DMatrix, DVector};

use super::SimError;

/// Factorization of the leading `p` columns of a design.
#[derive(Debug, Clone)]
enum Factor {
    Empty,
    /// `X_P = QR`, `Q` n×p.
    Tall {
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    },
    /// `X_Pᵀ = QR`, `Q` p×n; `X_P X_Pᵀ = RᵀR` and `Π = QQᵀ`.
    Wide {
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    },
}

/// Components of the conditional risk
/// `E_{w,θ}[Error | X] = in_span + leak + tail + σ²(noise + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskParts {
    /// `tr(Σ_P(I − Π))`; zero when `p <= n`.
    pub in_span: f64,
    /// Error from the discarded columns leaking into `θ̂_P`.
    pub leak: f64,
    /// `tr(Σ_{P^c})`.
    pub tail: f64,
    /// Noise amplification factor multiplying `σ²`.
    pub noise: f64,
    pub sigma: f64,
}

impl RiskParts {
    pub fn total(&self) -> f64 {
        self.in_span + self.leak + self.tail + self.sigma * self.sigma * (self.noise + 1.0)
    }
}

/// Least squares on the first `p` columns of `X`, min-norm when `p > n`.
#[derive(Debug, Clone)]
pub struct PcrSolver<'a> {
    x: &'a DMatrix<f64>,
    p: usize,
    factor: Factor,
    effective_rank: Option<usize>,
}

fn check_triangular(r: &DMatrix<f64>, rows: usize) -> Result<(), SimError> {
    let diag = r.diagonal();
    let largest = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let floor = largest * rows.max(r.ncols()) as f64 * f64::EPSILON;
    if largest == 0.0 || diag.iter().any(|d| d.abs() <= floor) {
        return Err(SimError::LinAlg("numerically singular Gram matrix".into()));
    }
    Ok(())
}

impl<'a> PcrSolver<'a> {
    pub fn new(x: &'a DMatrix<f64>, p: usize) -> Result<Self, SimError> {
        let (n, big_n) = x.shape();
        if p > big_n {
            return Err(SimError::Config(format!(
                "p = {p} exceeds the number of columns {big_n}"
            )));
        }
        let mut effective_rank = None;
        let factor = if p == 0 {
            Factor::Empty
        } else if p <= n {
            let xp = x.columns(0, p).into_owned();
            if p == n {
                let sv = xp.clone().singular_values();
                let top = sv.max();
                let rank = sv
                    .iter()
                    .filter(|s| **s > top * n as f64 * f64::EPSILON)
                    .count();
                effective_rank = Some(rank);
                if rank < n {
                    return Err(SimError::LinAlg(format!(
                        "design is rank deficient at p = n (rank {rank} < {n})"
                    )));
                }
            }
            let qr = xp.qr();
            let (q, r) = qr.unpack();
            check_triangular(&r, n)?;
            Factor::Tall { q, r }
        } else {
            let qr = x.columns(0, p).transpose().qr();
            let (q, r) = qr.unpack();
            check_triangular(&r, p)?;
            Factor::Wide { q, r }
        };
        Ok(Self {
            x,
            p,
            factor,
            effective_rank,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Numerical rank of `X_P`, computed by SVD at `p = n` only.
    pub fn effective_rank(&self) -> Option<usize> {
        self.effective_rank
    }

    /// `θ̂` of length `N`, zero outside the first `p` coordinates.
    pub fn fit(&self, y: &DVector<f64>) -> Result<DVector<f64>, SimError> {
        let (n, big_n) = self.x.shape();
        if y.len() != n {
            return Err(SimError::Config(format!(
                "response has length {}, expected {n}",
                y.len()
            )));
        }
        let mut theta = DVector::zeros(big_n);
        let head = match &self.factor {
            Factor::Empty => return Ok(theta),
            Factor::Tall { q, r } => r
                .solve_upper_triangular(&(q.transpose() * y))
                .ok_or_else(singular)?,
            Factor::Wide { q, r } => q * r.tr_solve_upper_triangular(y).ok_or_else(singular)?,
        };
        theta.rows_mut(0, self.p).copy_from(&head);
        Ok(theta)
    }

    /// `Πv` for `p > n`, the orthogonal projector onto the row space of `X_P`.
    pub fn project(&self, v: &DVector<f64>) -> Option<DVector<f64>> {
        match &self.factor {
            Factor::Wide { q, .. } => Some(q * (q.transpose() * v)),
            _ => None,
        }
    }

    pub fn risk_parts(&self, lambdas: &[f64], sigma: f64) -> Result<RiskParts, SimError> {
        let big_n = self.x.ncols();
        if lambdas.len() != big_n {
            return Err(SimError::Config(
                "eigenvalue vector does not match the design width".into(),
            ));
        }
        let p = self.p;
        let tail: f64 = lambdas[p..].iter().sum();
        let rest = self.x.columns(p, big_n - p);
        let (in_span, leak, noise) = match &self.factor {
            Factor::Empty => (0.0, 0.0, 0.0),
            Factor::Tall { q, r } => {
                let b = r
                    .solve_upper_triangular(&(q.transpose() * rest))
                    .ok_or_else(singular)?;
                let r_inv = r
                    .solve_upper_triangular(&DMatrix::identity(p, p))
                    .ok_or_else(singular)?;
                (
                    0.0,
                    weighted_row_norms(&b, lambdas),
                    weighted_row_norms(&r_inv, lambdas),
                )
            }
            Factor::Wide { q, r } => {
                let in_span = q
                    .row_iter()
                    .zip(lambdas)
                    .map(|(row, l)| l * (1.0 - row.norm_squared()))
                    .sum();
                let mut qd = q.clone();
                for (i, mut row) in qd.row_iter_mut().enumerate() {
                    row *= lambdas[i].sqrt();
                }
                let u = r
                    .solve_upper_triangular(&qd.transpose())
                    .ok_or_else(singular)?;
                let leak = (u.transpose() * rest).norm_squared();
                (in_span, leak, u.norm_squared())
            }
        };
        Ok(RiskParts {
            in_span,
            leak,
            tail,
            noise,
            sigma,
        })
    }

    pub fn conditional_risk(&self, lambdas: &[f64], sigma: f64) -> Result<f64, SimError> {
        Ok(self.risk_parts(lambdas, sigma)?.total())
    }
}

fn singular() -> SimError {
    SimError::LinAlg("triangular solve hit a zero pivot".into())
}

/// `Σ_i λ_i ‖row_i(m)‖²`.
fn weighted_row_norms(m: &DMatrix<f64>, lambdas: &[f64]) -> f64 {
    m.row_iter()
        .zip(lambdas)
        .map(|(row, l)| l * row.norm_squared())
        .sum()
}
