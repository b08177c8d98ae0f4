//! Probabilistic PCA.
//!
//! Observations follow `x = B z + μ + ε` with `z ~ N(0, I_k)` and
//! `ε ~ N(0, σ² I_d)`, so marginally `x ~ N(μ, B Bᵀ + σ² I)`. `μ` is fixed at
//! the column mean; `B` and `σ²` are fitted by EM, optionally with a
//! conjugate-style prior (`B_ij ~ N(0, 1/τ)`, `σ² ~ InvGamma(a, b)`) so that
//! the M-step finds a MAP estimate. The MAP fit is what the rank-selection
//! BIC is evaluated at.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PpcaError {
    #[error("latent dimension k = {k} must satisfy 1 <= k < d = {d}")]
    InvalidRank { k: usize, d: usize },
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model covariance is not positive definite")]
    SingularCovariance,
    #[error("EM did not converge within {} iterations", .0.1.iterations)]
    ConvergenceFailure(Box<(PpcaModel, PpcaFitReport)>),
    #[error("composition row {row}: {reason}")]
    InvalidComposition { row: usize, reason: String },
    #[error("no candidate rank could be fitted")]
    NoFeasibleRank,
}

impl PpcaError {
    /// Best-so-far fit carried by a convergence failure.
    pub fn into_best_so_far(self) -> Option<(PpcaModel, PpcaFitReport)> {
        match self {
            PpcaError::ConvergenceFailure(b) => Some(*b),
            _ => None,
        }
    }
}

/// Rows of percentages (each summing to 100).
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionMatrix {
    rows: DMatrix<f64>,
}

impl CompositionMatrix {
    /// Row sums must be within `1e-6` of 100 and entries non-negative.
    pub fn new(rows: DMatrix<f64>) -> Result<Self, PpcaError> {
        for (i, row) in rows.row_iter().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(PpcaError::InvalidComposition {
                    row: i,
                    reason: "negative or non-finite entry".into(),
                });
            }
            let sum = row.sum();
            if (sum - 100.0).abs() > 1e-6 {
                return Err(PpcaError::InvalidComposition {
                    row: i,
                    reason: format!("row sums to {sum}, not 100"),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, PpcaError> {
        let d = rows.first().map_or(0, |r| r.len());
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        if flat.len() != d * rows.len() {
            return Err(PpcaError::DimensionMismatch {
                expected: d * rows.len(),
                got: flat.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows.len(), d, &flat))
    }

    pub fn percentages(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// Entries divided by 100.
    pub fn proportions(&self) -> DMatrix<f64> {
        &self.rows / 100.0
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            rows: self.rows.select_rows(idx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcaModel {
    /// `d × k` loading matrix.
    pub loadings: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub sigma2: f64,
}

impl PpcaModel {
    pub fn new(loadings: DMatrix<f64>, mean: DVector<f64>, sigma2: f64) -> Result<Self, PpcaError> {
        if loadings.nrows() != mean.len() {
            return Err(PpcaError::DimensionMismatch {
                expected: mean.len(),
                got: loadings.nrows(),
            });
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(PpcaError::SingularCovariance);
        }
        Ok(Self {
            loadings,
            mean,
            sigma2,
        })
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.loadings.ncols()
    }

    /// `B Bᵀ + σ² I`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.d();
        &self.loadings * self.loadings.transpose() + DMatrix::identity(d, d) * self.sigma2
    }

    /// Inverse of `M = BᵀB + σ² I` (k × k).
    fn m_inverse(&self) -> Result<DMatrix<f64>, PpcaError> {
        let k = self.k();
        let m = self.loadings.transpose() * &self.loadings + DMatrix::identity(k, k) * self.sigma2;
        m.cholesky()
            .map(|c| c.inverse())
            .ok_or(PpcaError::SingularCovariance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcaFitReport {
    /// Objective after initialization and after each EM iteration: the
    /// log-likelihood for ML fits, the log posterior for MAP fits.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood of the returned model.
    pub loglik: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 2_000,
            seed: 0,
        }
    }
}

/// Prior used by the MAP M-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpcaPrior {
    /// Precision `τ` of the independent normal prior on loading entries.
    pub loading_precision: f64,
    pub sigma2_shape: f64,
    pub sigma2_scale: f64,
}

impl Default for PpcaPrior {
    fn default() -> Self {
        Self {
            loading_precision: 1.0,
            sigma2_shape: 0.01,
            sigma2_scale: 0.01,
        }
    }
}

impl PpcaPrior {
    fn log_density(&self, model: &PpcaModel) -> f64 {
        let tau = self.loading_precision;
        let n = (model.d() * model.k()) as f64;
        let (a, b) = (self.sigma2_shape, self.sigma2_scale);
        0.5 * n * (tau / (2.0 * PI)).ln() - 0.5 * tau * model.loadings.norm_squared()
            + a * b.ln()
            - ln_gamma(a)
            - (a + 1.0) * model.sigma2.ln()
            - b / model.sigma2
    }
}

/// Free parameters of a rank-`k` model in `d` dimensions: loadings up to
/// rotation, the mean, and the noise variance.
pub fn free_parameters(d: usize, k: usize) -> usize {
    d * k - k * (k.saturating_sub(1)) / 2 + d + 1
}

fn column_mean(x: &DMatrix<f64>) -> DVector<f64> {
    x.row_mean().transpose()
}

/// Centered rows and `S = (1/N) Σ (x - μ)(x - μ)ᵀ`.
fn centered_covariance(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for mut row in c.row_iter_mut() {
        row -= mean.transpose();
    }
    c.transpose() * &c / x.nrows() as f64
}

fn check_shape(x: &DMatrix<f64>, k: usize) -> Result<(), PpcaError> {
    let d = x.ncols();
    if k == 0 || k >= d {
        return Err(PpcaError::InvalidRank { k, d });
    }
    if x.nrows() < 2 {
        return Err(PpcaError::TooFewObservations(x.nrows()));
    }
    Ok(())
}

/// `-N/2 [d ln 2π + ln|C| + tr(C⁻¹ S)]` with `C` factored by Cholesky.
fn loglik_from_cov(s: &DMatrix<f64>, n: usize, model: &PpcaModel) -> Result<f64, PpcaError> {
    let d = model.d() as f64;
    let chol = model
        .covariance()
        .cholesky()
        .ok_or(PpcaError::SingularCovariance)?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let trace = chol.solve(s).trace();
    let ll = -0.5 * n as f64 * (d * (2.0 * PI).ln() + log_det + trace);
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(PpcaError::SingularCovariance)
    }
}

/// Exact log-likelihood of the rows of `x` under `model`.
pub fn log_likelihood(x: &DMatrix<f64>, model: &PpcaModel) -> Result<f64, PpcaError> {
    if x.ncols() != model.d() {
        return Err(PpcaError::DimensionMismatch {
            expected: model.d(),
            got: x.ncols(),
        });
    }
    let s = centered_covariance(x, &model.mean);
    loglik_from_cov(&s, x.nrows(), model)
}

/// Posterior of `z` given `x`: mean `M⁻¹ Bᵀ (x - μ)` and covariance `σ² M⁻¹`,
/// where `M = BᵀB + σ² I`. The covariance does not depend on `x`.
pub fn posterior_latent(
    x: &DVector<f64>,
    model: &PpcaModel,
) -> Result<(DVector<f64>, DMatrix<f64>), PpcaError> {
    if x.len() != model.d() {
        return Err(PpcaError::DimensionMismatch {
            expected: model.d(),
            got: x.len(),
        });
    }
    let m_inv = model.m_inverse()?;
    let mean = &m_inv * model.loadings.transpose() * (x - &model.mean);
    Ok((mean, m_inv * model.sigma2))
}

/// Posterior latent means for every row (`N × k`).
pub fn transform(x: &DMatrix<f64>, model: &PpcaModel) -> Result<DMatrix<f64>, PpcaError> {
    if x.ncols() != model.d() {
        return Err(PpcaError::DimensionMismatch {
            expected: model.d(),
            got: x.ncols(),
        });
    }
    let projector = model.m_inverse()? * model.loadings.transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= model.mean.transpose();
    }
    Ok(centered * projector.transpose())
}

fn initial_model(x: &DMatrix<f64>, s: &DMatrix<f64>, k: usize, seed: u64) -> PpcaModel {
    let d = x.ncols();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    let q = g.qr().q();
    let avg_var = s.trace() / d as f64;
    PpcaModel {
        loadings: q,
        mean: column_mean(x),
        sigma2: (0.5 * avg_var).max(f64::MIN_POSITIVE),
    }
}

fn em(
    x: &DMatrix<f64>,
    k: usize,
    opts: &EmOptions,
    prior: Option<&PpcaPrior>,
) -> Result<(PpcaModel, PpcaFitReport), PpcaError> {
    check_shape(x, k)?;
    let n = x.nrows();
    let d = x.ncols();
    let nf = n as f64;
    let mean = column_mean(x);
    let s = centered_covariance(x, &mean);
    let mut model = initial_model(x, &s, k, opts.seed);
    let objective = |m: &PpcaModel| -> Result<f64, PpcaError> {
        let ll = loglik_from_cov(&s, n, m)?;
        Ok(ll + prior.map_or(0.0, |p| p.log_density(m)))
    };

    let mut trace = vec![objective(&model)?];
    let mut converged = false;
    let mut iterations = 0;
    let identity = DMatrix::<f64>::identity(k, k);
    while iterations < opts.max_iter {
        let w = &model.loadings;
        let sigma2 = model.sigma2;
        let m_inv = model.m_inverse()?;
        let sw = &s * w;
        let a = &sw * &m_inv * nf;
        let g = (&m_inv * sigma2 + &m_inv * w.transpose() * &sw * &m_inv) * nf;
        let tau = prior.map_or(0.0, |p| p.loading_precision);
        let w_new = &a
            * (&g + &identity * (sigma2 * tau))
                .cholesky()
                .ok_or(PpcaError::SingularCovariance)?
                .inverse();
        let q = nf * s.trace() - 2.0 * (w_new.transpose() * &a).trace()
            + (&g * w_new.transpose() * &w_new).trace();
        let sigma2_new = match prior {
            None => q / (nf * d as f64),
            Some(p) => (q + 2.0 * p.sigma2_scale) / (nf * d as f64 + 2.0 * (p.sigma2_shape + 1.0)),
        };
        if !(sigma2_new.is_finite() && sigma2_new > 0.0) {
            return Err(PpcaError::SingularCovariance);
        }
        model.loadings = w_new;
        model.sigma2 = sigma2_new;
        iterations += 1;
        let value = objective(&model)?;
        let gain = value - trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        trace.push(value);
        if gain.abs() < opts.tol {
            converged = true;
            break;
        }
    }

    let loglik = loglik_from_cov(&s, n, &model)?;
    let bic = -2.0 * loglik + free_parameters(d, k) as f64 * nf.ln();
    let report = PpcaFitReport {
        loglik_trace: trace,
        iterations,
        converged,
        loglik,
        bic,
    };
    if converged {
        Ok((model, report))
    } else {
        Err(PpcaError::ConvergenceFailure(Box::new((model, report))))
    }
}

/// Maximum-likelihood EM fit with `μ` fixed at the column mean.
pub fn em_fit(
    x: &DMatrix<f64>,
    k: usize,
    opts: &EmOptions,
) -> Result<(PpcaModel, PpcaFitReport), PpcaError> {
    em(x, k, opts, None)
}

/// MAP EM fit; the report's `bic` is evaluated at the MAP estimate.
pub fn map_fit(
    x: &DMatrix<f64>,
    k: usize,
    prior: &PpcaPrior,
    opts: &EmOptions,
) -> Result<(PpcaModel, PpcaFitReport), PpcaError> {
    em(x, k, opts, Some(prior))
}

/// Non-convergence keeps the best-so-far fit (with a warning); other
/// failures propagate.
fn map_fit_lenient(
    x: &DMatrix<f64>,
    k: usize,
    prior: &PpcaPrior,
    opts: &EmOptions,
) -> Result<(PpcaModel, PpcaFitReport), PpcaError> {
    match map_fit(x, k, prior, opts) {
        Err(PpcaError::ConvergenceFailure(best)) => {
            log::warn!("PPCA MAP fit for k = {k} did not converge; using best-so-far");
            Ok(*best)
        }
        other => other,
    }
}

/// `-2 ln L(MAP) + K ln N` with `K = dk - k(k-1)/2 + d + 1`.
pub fn map_bic(
    x: &DMatrix<f64>,
    k: usize,
    prior: &PpcaPrior,
    opts: &EmOptions,
) -> Result<f64, PpcaError> {
    map_fit_lenient(x, k, prior, opts).map(|(_, r)| r.bic)
}

/// BIC for each candidate rank `1..=k_max`; ranks that fail to fit are `None`.
pub fn bic_curve(
    x: &DMatrix<f64>,
    k_max: usize,
    prior: &PpcaPrior,
    opts: &EmOptions,
) -> Vec<(usize, Option<f64>)> {
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let per_k = EmOptions {
                seed: opts.seed.wrapping_add(k as u64),
                ..*opts
            };
            match map_bic(x, k, prior, &per_k) {
                Ok(b) => (k, Some(b)),
                Err(e) => {
                    log::warn!("skipping k = {k}: {e}");
                    (k, None)
                }
            }
        })
        .collect()
}

/// Rank minimizing the MAP BIC over `1..=k_max`; ties go to the smaller rank.
pub fn select_k(
    x: &DMatrix<f64>,
    k_max: usize,
    prior: &PpcaPrior,
    opts: &EmOptions,
) -> Result<usize, PpcaError> {
    if k_max == 0 || k_max >= x.ncols() {
        return Err(PpcaError::InvalidRank {
            k: k_max,
            d: x.ncols(),
        });
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, bic) in bic_curve(x, k_max, prior, opts) {
        if let Some(b) = bic {
            if best.is_none_or(|(_, bb)| b < bb) {
                best = Some((k, b));
            }
        }
    }
    best.map(|(k, _)| k).ok_or(PpcaError::NoFeasibleRank)
}

/// How the mean term enters a reconstructed coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanTerm {
    /// Add the composition column mean `μ`.
    #[default]
    ColumnMean,
    /// Loadings times coefficient only.
    Omit,
}

/// Maps coefficients on the latent scores back to composition space:
/// `B · coef + μ`.
pub fn reconstruct_coefficients(
    coef_on_pcs: &[f64],
    model: &PpcaModel,
    mean_term: MeanTerm,
) -> Result<DVector<f64>, PpcaError> {
    if coef_on_pcs.len() != model.k() {
        return Err(PpcaError::DimensionMismatch {
            expected: model.k(),
            got: coef_on_pcs.len(),
        });
    }
    let effect = &model.loadings * DVector::from_column_slice(coef_on_pcs);
    Ok(match mean_term {
        MeanTerm::ColumnMean => effect + &model.mean,
        MeanTerm::Omit => effect,
    })
}

/// On-disk form of a fitted model (loadings stored row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcaModelFile {
    pub d: usize,
    pub k: usize,
    pub mu: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub sigma2: f64,
    pub seed: u64,
    pub loglik: f64,
}

impl PpcaModelFile {
    pub fn from_model(model: &PpcaModel, seed: u64, loglik: f64) -> Self {
        let b = model
            .loadings
            .row_iter()
            .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
            .collect();
        Self {
            d: model.d(),
            k: model.k(),
            mu: model.mean.iter().copied().collect(),
            b,
            sigma2: model.sigma2,
            seed,
            loglik,
        }
    }

    pub fn to_model(&self) -> Result<PpcaModel, PpcaError> {
        if self.b.len() != self.d * self.k || self.mu.len() != self.d {
            return Err(PpcaError::DimensionMismatch {
                expected: self.d * self.k,
                got: self.b.len(),
            });
        }
        PpcaModel::new(
            DMatrix::from_row_slice(self.d, self.k, &self.b),
            DVector::from_column_slice(&self.mu),
            self.sigma2,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn standard_normal_density_at_zero() {
        let m = PpcaModel::new(DMatrix::zeros(1, 1), DVector::zeros(1), 1.0).unwrap();
        let ll = log_likelihood(&DMatrix::zeros(1, 1), &m).unwrap();
        assert!((ll + 0.5 * (2.0 * PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn loglik_matches_dense_inverse() {
        for seed in 0..10 {
            let x = random_matrix(5, 3, seed);
            let b = random_matrix(3, 2, seed + 100);
            let mu = DVector::from_fn(3, |i, _| 0.1 * i as f64);
            let m = PpcaModel::new(b, mu.clone(), 0.3).unwrap();
            let c = m.covariance();
            let c_inv = c.clone().try_inverse().unwrap();
            let mut naive = -2.5 * (3.0 * (2.0 * PI).ln() + c.determinant().ln());
            for row in x.row_iter() {
                let r = row.transpose() - &mu;
                naive -= 0.5 * (r.transpose() * &c_inv * &r)[(0, 0)];
            }
            assert!((log_likelihood(&x, &m).unwrap() - naive).abs() < 1e-8);
        }
    }

    #[test]
    fn loglik_rotation_invariant() {
        let x = random_matrix(30, 4, 1);
        let b = random_matrix(4, 2, 2);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let m1 = PpcaModel::new(b.clone(), DVector::zeros(4), 0.5).unwrap();
        let m2 = PpcaModel::new(b * rot, DVector::zeros(4), 0.5).unwrap();
        assert!((log_likelihood(&x, &m1).unwrap() - log_likelihood(&x, &m2).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn posterior_at_mean_is_zero_and_cov_is_shared() {
        let b = random_matrix(5, 2, 3);
        let mu = DVector::from_fn(5, |i, _| i as f64);
        let m = PpcaModel::new(b, mu.clone(), 0.2).unwrap();
        let (z, cov0) = posterior_latent(&mu, &m).unwrap();
        assert!(z.norm() < 1e-14);
        let xs = random_matrix(100, 5, 4);
        for row in xs.row_iter() {
            let (_, cov) = posterior_latent(&row.transpose(), &m).unwrap();
            assert_eq!(cov, cov0);
        }
    }

    #[test]
    fn free_parameter_count() {
        assert_eq!(free_parameters(10, 1), 10 + 10 + 1);
        assert_eq!(free_parameters(10, 2), 20 - 1 + 11);
        assert_eq!(free_parameters(10, 4), 40 - 6 + 11);
    }

    #[test]
    fn invalid_rank() {
        let x = random_matrix(20, 3, 0);
        assert!(matches!(em_fit(&x, 3, &EmOptions::default()), Err(PpcaError::InvalidRank { .. })));
        assert!(matches!(em_fit(&x, 0, &EmOptions::default()), Err(PpcaError::InvalidRank { .. })));
    }

    #[test]
    fn zero_iterations_report_initial_value() {
        let x = random_matrix(50, 4, 5);
        let opts = EmOptions {
            max_iter: 0,
            ..Default::default()
        };
        let (model, report) = em_fit(&x, 2, &opts).unwrap_err().into_best_so_far().unwrap();
        assert_eq!(report.iterations, 0);
        assert!(!report.converged);
        assert_eq!(report.loglik_trace.len(), 1);
        assert_eq!(report.loglik_trace[0], log_likelihood(&x, &model).unwrap());
    }

    #[test]
    fn reconstruction() {
        let mu = DVector::from_column_slice(&[0.2, 0.3, 0.5]);
        let b = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let m = PpcaModel::new(b, mu.clone(), 0.1).unwrap();
        assert_eq!(reconstruct_coefficients(&[0.0], &m, MeanTerm::ColumnMean).unwrap(), mu);
        let r = reconstruct_coefficients(&[0.7], &m, MeanTerm::ColumnMean).unwrap();
        assert!((r[0] - 0.9).abs() < 1e-15 && r[1] == 0.3 && r[2] == 0.5);
        assert!(reconstruct_coefficients(&[1.0, 2.0], &m, MeanTerm::Omit).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let b = random_matrix(4, 2, 8);
        let m = PpcaModel::new(b, DVector::from_element(4, 0.25), 0.01).unwrap();
        let file = PpcaModelFile::from_model(&m, 7, -1.0);
        assert_eq!(file.b[1], m.loadings[(0, 1)]);
        let json = serde_json::to_string(&file).unwrap();
        let back: PpcaModelFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_model().unwrap(), m);
    }

    #[test]
    fn composition_validation() {
        assert!(CompositionMatrix::from_rows(&[vec![50.0, 50.0], vec![100.0, 0.0]]).is_ok());
        assert!(CompositionMatrix::from_rows(&[vec![50.0, 40.0]]).is_err());
        assert!(CompositionMatrix::from_rows(&[vec![110.0, -10.0]]).is_err());
    }
}
