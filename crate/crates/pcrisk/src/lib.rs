//! Monte Carlo verification and command-line tooling for the asymptotic
//! PCR risk computed in [`pcrisk_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod density_config;
pub mod sim;
pub mod table;

pub use pcrisk_core as core;
