//! Count regression models: ordinary Poisson and CMP, and the two hurdle
//! components (binary gate, zero-truncated counts).

mod component;
mod hurdle;

pub use component::{
    fit_binary, fit_component, fit_ordinary_cmp_exchange, fit_ordinary_poisson, fit_zt_count,
    Component, CountFamily, FittedComponent,
};
pub use hurdle::{fit_hurdle, hurdle_pmf, positive_seed, HurdleFit};

use crate::cmp::CmpError;
use crate::links::LinkError;
use crate::mcmc::McmcError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid regression data: {0}")]
    InvalidData(String),
    #[error("binary outcome is degenerate: {positives} positives out of {total}")]
    AllOnesOrAllZeros { positives: usize, total: usize },
    #[error("no positive counts to fit the zero-truncated component")]
    EmptyPositiveSet,
    #[error("auxiliary CMP draw failed: {0}")]
    AuxiliarySamplingFailure(#[source] CmpError),
    #[error("positive component failed: {source}")]
    PositiveComponent {
        /// The binary component, which was fitted successfully.
        binary: Box<FittedComponent>,
        #[source]
        source: Box<ModelError>,
    },
    #[error("component does not match the chain: {0}")]
    ParameterMismatch(String),
    #[error(transparent)]
    Mcmc(#[from] McmcError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Cmp(#[from] CmpError),
    #[error("deviance is not finite")]
    NonFiniteDeviance,
}

/// Counts, design matrix (intercept column included) and log exposures.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    pub y: Vec<u64>,
    pub x: DMatrix<f64>,
    pub offset: Vec<f64>,
    pub names: Vec<String>,
}

impl RegressionData {
    pub fn new(
        y: Vec<u64>,
        x: DMatrix<f64>,
        offset: Option<Vec<f64>>,
        names: Vec<String>,
    ) -> Result<Self, ModelError> {
        let m = y.len();
        let offset = offset.unwrap_or_else(|| vec![0.0; m]);
        if x.nrows() != m || offset.len() != m {
            return Err(ModelError::InvalidData(format!(
                "{m} outcomes, {} design rows, {} offsets",
                x.nrows(),
                offset.len()
            )));
        }
        if names.len() != x.ncols() {
            return Err(ModelError::InvalidData(format!(
                "{} names for {} columns",
                names.len(),
                x.ncols()
            )));
        }
        if m == 0 || x.ncols() == 0 {
            return Err(ModelError::InvalidData("empty data".into()));
        }
        if x.iter().chain(&offset).any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidData("non-finite design or offset value".into()));
        }
        Ok(Self { y, x, offset, names })
    }

    /// Prepends an intercept column named `intercept`.
    pub fn with_intercept(
        y: Vec<u64>,
        covariates: &DMatrix<f64>,
        covariate_names: &[String],
        offset: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let x = covariates.clone().insert_column(0, 1.0);
        let names = std::iter::once("intercept".to_string())
            .chain(covariate_names.iter().cloned())
            .collect();
        Self::new(y, x, offset, names)
    }

    pub fn intercept_only(y: Vec<u64>, offset: Option<Vec<f64>>) -> Result<Self, ModelError> {
        let m = y.len();
        Self::new(y, DMatrix::from_element(m, 1, 1.0), offset, vec!["intercept".into()])
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_coef(&self) -> usize {
        self.x.ncols()
    }

    pub fn y_plus(&self) -> Vec<bool> {
        self.y.iter().map(|&v| v > 0).collect()
    }

    /// Rows with `y >= 1`.
    pub fn positive_subset(&self) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.y[i] > 0).collect();
        Self {
            y: idx.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select_rows(&idx),
            offset: idx.iter().map(|&i| self.offset[i]).collect(),
            names: self.names.clone(),
        }
    }

    /// `X β`, plus the offset when `with_offset` is set.
    pub fn linear_predictor(&self, coef: &[f64], with_offset: bool) -> DVector<f64> {
        let mut eta = &self.x * DVector::from_column_slice(coef);
        if with_offset {
            for (e, o) in eta.iter_mut().zip(&self.offset) {
                *e += o;
            }
        }
        eta
    }
}

/// Priors shared by every model.
///
/// Coefficients get independent `Normal(0, coef_sd²)`, the skewed-Weibull
/// shape `α ~ Gamma(alpha_shape, alpha_rate)` (shape-rate) and the CMP
/// dispersion `ν ~ LogNormal(0, nu_log_sd²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub coef_sd: f64,
    pub alpha_shape: f64,
    pub alpha_rate: f64,
    pub nu_log_sd: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            coef_sd: 10.0,
            alpha_shape: 0.1,
            alpha_rate: 0.1,
            nu_log_sd: 1.0,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.coef_sd, self.alpha_shape, self.alpha_rate, self.nu_log_sd];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(ModelError::InvalidData("prior hyperparameters must be positive".into()))
        }
    }

    /// Unnormalized log prior of a coefficient vector.
    pub fn log_coef(&self, coef: &[f64]) -> f64 {
        let v = self.coef_sd * self.coef_sd;
        -coef.iter().map(|b| b * b).sum::<f64>() / (2.0 * v)
    }

    pub fn log_alpha(&self, alpha: f64) -> f64 {
        if alpha > 0.0 {
            (self.alpha_shape - 1.0) * alpha.ln() - self.alpha_rate * alpha
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn log_nu(&self, nu: f64) -> f64 {
        if nu > 0.0 {
            let l = nu.ln();
            -l - l * l / (2.0 * self.nu_log_sd * self.nu_log_sd)
        } else {
            f64::NEG_INFINITY
        }
    }
}
