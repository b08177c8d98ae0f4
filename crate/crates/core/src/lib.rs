//! Bayesian count regression for zero-heavy, dispersed data.

pub mod cmp;
pub mod links;
pub mod mcmc;
pub mod ppca;
pub mod diagnostics;
pub mod models;
pub mod pipeline;
