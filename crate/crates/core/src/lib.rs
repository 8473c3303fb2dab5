//! Asymptotic out-of-sample risk of principal component regression (PCR)
//! with uncorrelated Gaussian features.
//!
//! The crate is `no_std` (it needs `alloc` for quadrature work lists and
//! risk curves) and is organised in three layers:
//!
//! * [`numkernel`]: closed-form power integrals, adaptive Gauss–Kronrod
//!   quadrature, and a safeguarded bracketing root finder.
//! * [`polyrisk`]: risk under polynomial eigenvalue decay `λ_j = j^{-κ}`,
//!   in both the `p < n` and the interpolating `p > n` regime, with the
//!   companion Stieltjes fixed point that drives the latter.
//! * [`generalrisk`]: the same quantities for a general limiting spectral
//!   density with an atom at zero, with components chosen by a threshold `ν`.
//!
//! Simulation, IO and the command line live in the `pcrisk` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod generalrisk;
pub mod numkernel;
pub mod polyrisk;

pub use error::{Error, Result};
pub use generalrisk::{DensitySpec, Family, GeneralModel, SpectralDensity};
pub use numkernel::Tolerance;
pub use polyrisk::{FixedPoint, PolyModel, Regime, RiskPoint};
