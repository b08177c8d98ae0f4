//! Posterior summaries and model checks.

use crate::cmp::{self, CmpError, CmpParams, TruncationPolicy};
use crate::mcmc::PosteriorChain;
use crate::models::{Component, CountFamily, FittedComponent, HurdleFit, RegressionData};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {needed} draws, got {got}")]
    InsufficientDraws { needed: usize, got: usize },
    #[error("deviance is not finite at draw {0}")]
    NonFiniteDeviance(usize),
    #[error("trace of length {0} is too short (need 100)")]
    TraceTooShort(usize),
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("model has no predictive distribution on its own: {0}")]
    UnsupportedModel(&'static str),
    #[error("predictive draw failed: {0}")]
    Sampling(#[from] CmpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DicResult {
    pub dic: f64,
    pub p_d: f64,
    /// Mean deviance over draws.
    pub dbar: f64,
    /// Deviance at the posterior mean.
    pub dhat: f64,
}

impl DicResult {
    pub fn from_deviances(dbar: f64, dhat: f64) -> Self {
        Self {
            dic: 2.0 * dbar - dhat,
            p_d: dbar - dhat,
            dbar,
            dhat,
        }
    }
}

/// `DIC = 2 D̄ - D(θ̄)` with `D = -2 log L`. `θ̄` is the column mean of the
/// draws on their stored scale.
pub fn dic<F>(chain: &PosteriorChain, loglik: F) -> Result<DicResult, DiagnosticsError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let s = chain.n_draws();
    if s < 2 {
        return Err(DiagnosticsError::InsufficientDraws { needed: 2, got: s });
    }
    let deviances: Vec<f64> = chain.draws.par_iter().map(|d| -2.0 * loglik(d)).collect();
    if let Some(i) = deviances.iter().position(|d| !d.is_finite()) {
        return Err(DiagnosticsError::NonFiniteDeviance(i));
    }
    let d0 = deviances[0];
    let dbar = d0 + deviances.iter().map(|d| d - d0).sum::<f64>() / s as f64;
    let dhat = -2.0 * loglik(&chain.posterior_mean());
    if !dhat.is_finite() {
        return Err(DiagnosticsError::NonFiniteDeviance(s));
    }
    Ok(DicResult::from_deviances(dbar, dhat))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpdInterval {
    pub lower: f64,
    pub upper: f64,
    pub prob: f64,
}

/// Shortest window of sorted draws holding `⌈prob·S⌉` of them; the leftmost
/// window wins ties.
pub fn hpd_interval(draws: &[f64], prob: f64) -> Result<HpdInterval, DiagnosticsError> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(DiagnosticsError::InvalidProbability(prob));
    }
    let s = draws.len();
    if s < 10 {
        return Err(DiagnosticsError::InsufficientDraws { needed: 10, got: s });
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inside = ((prob * s as f64).ceil() as usize).clamp(1, s);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for i in 0..=s - inside {
        let width = sorted[i + inside - 1] - sorted[i];
        if width < best_width {
            best_width = width;
            best = i;
        }
    }
    Ok(HpdInterval {
        lower: sorted[best],
        upper: sorted[best + inside - 1],
        prob,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Spectral density at frequency zero from non-overlapping batch means of
/// size `⌊√n⌋`; `S0 / n` estimates the variance of the trace mean.
pub fn spectral_density_zero(trace: &[f64]) -> f64 {
    let n = trace.len();
    let b = ((n as f64).sqrt() as usize).max(1);
    let nb = n / b;
    if nb < 2 {
        return 0.0;
    }
    let means: Vec<f64> = (0..nb).map(|i| mean(&trace[i * b..(i + 1) * b])).collect();
    let m = mean(&means);
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nb - 1) as f64;
    b as f64 * var
}

/// Monte Carlo standard error of the trace mean, from Geyer's initial
/// positive sequence: autocovariance pairs `γ(2k) + γ(2k+1)` are summed
/// until the first non-positive pair.
pub fn mcse(trace: &[f64]) -> f64 {
    let n = trace.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(trace);
    let c: Vec<f64> = trace.iter().map(|v| v - m).collect();
    let acov = |k: usize| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let mut sigma2 = -acov(0);
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = acov(2 * k) + acov(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        sigma2 += 2.0 * pair;
        k += 1;
    }
    (sigma2.max(0.0) / n as f64).sqrt()
}

/// `∫_0^∞ exp(-x cosh t) cosh(ν t) dt`, the modified Bessel function K_ν(x).
fn bessel_k(nu: f64, x: f64) -> f64 {
    // The integrand decays doubly exponentially; stop once x·cosh t passes 750.
    let t_max = (750.0 / x).max(1.0).acosh() + 1.0;
    let h = 1e-3;
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut sum = 0.5 * f(0.0);
    for i in 1..=steps {
        sum += f(i as f64 * h);
    }
    sum * h
}

/// Limiting CDF of the Cramér-von Mises statistic.
pub fn cramer_von_mises_cdf(q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 0..4 {
        let kf = k as f64;
        let z = gamma(kf + 0.5) * (4.0 * kf + 1.0).sqrt() / (gamma(kf + 1.0) * PI.powf(1.5) * q.sqrt());
        let u = (4.0 * kf + 1.0).powi(2) / (16.0 * q);
        if u <= 1e-5f64.ln().abs() {
            total += z * (-u).exp() * bessel_k(0.25, u);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeidelbergerWelch {
    pub stationary: bool,
    /// Fraction of the trace kept after front discarding (0 when the test failed).
    pub kept_fraction: f64,
    /// Cramér-von Mises p-value at the accepted (or last tried) start.
    pub p_value: f64,
    pub halfwidth_ok: bool,
    pub mean: f64,
    pub halfwidth: f64,
}

/// Heidelberger-Welch stationarity and halfwidth test at level 0.05 and
/// relative accuracy 0.1. Up to half the trace is discarded from the front
/// in 10% steps until the Cramér-von Mises test passes.
pub fn heidelberger_welch(trace: &[f64]) -> Result<HeidelbergerWelch, DiagnosticsError> {
    let n = trace.len();
    if n < 100 {
        return Err(DiagnosticsError::TraceTooShort(n));
    }
    let first = trace[0];
    if trace.iter().all(|&v| v == first) {
        return Ok(HeidelbergerWelch {
            stationary: true,
            kept_fraction: 1.0,
            p_value: 1.0,
            halfwidth_ok: true,
            mean: first,
            halfwidth: 0.0,
        });
    }

    let s0_tail = spectral_density_zero(&trace[n / 2..]);
    let mut p_value = 0.0;
    for step in 0..=5 {
        let start = step * n / 10;
        let y = &trace[start..];
        let len = y.len() as f64;
        let ybar = mean(y);
        let mut cum = 0.0;
        let mut stat = 0.0;
        for (i, v) in y.iter().enumerate() {
            cum += v;
            let b = cum - ybar * (i + 1) as f64;
            stat += b * b;
        }
        stat /= len * len * s0_tail;
        p_value = 1.0 - cramer_von_mises_cdf(stat);
        if p_value > 0.05 {
            let halfwidth = 1.96 * (spectral_density_zero(y) / len).sqrt();
            return Ok(HeidelbergerWelch {
                stationary: true,
                kept_fraction: len / n as f64,
                p_value,
                halfwidth_ok: halfwidth <= 0.1 * ybar.abs(),
                mean: ybar,
                halfwidth,
            });
        }
    }
    Ok(HeidelbergerWelch {
        stationary: false,
        kept_fraction: 0.0,
        p_value,
        halfwidth_ok: false,
        mean: mean(trace),
        halfwidth: f64::NAN,
    })
}

/// Replicate response vectors from the posterior predictive distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSample {
    pub draws: Vec<Vec<u64>>,
    /// Chain row behind each replicate.
    pub param_index: Vec<usize>,
    /// Set when more replicates were requested than the chain holds.
    pub with_replacement: bool,
}

impl PredictiveSample {
    /// Mean replicate value per observation.
    pub fn mean(&self) -> Vec<f64> {
        let m = self.draws.first().map_or(0, Vec::len);
        let s = self.draws.len() as f64;
        (0..m)
            .map(|i| self.draws.iter().map(|d| d[i] as f64).sum::<f64>() / s)
            .collect()
    }
}

/// What to simulate replicates from.
#[derive(Debug, Clone, Copy)]
pub enum PredictiveModel<'a> {
    /// Ordinary Poisson or CMP regression.
    Ordinary(&'a FittedComponent),
    Hurdle(&'a HurdleFit),
}

fn pick_rows<R: Rng + ?Sized>(n_draws: usize, s: usize, rng: &mut R) -> (Vec<usize>, bool) {
    if s <= n_draws {
        (index::sample(rng, n_draws, s).into_vec(), false)
    } else {
        log::warn!("{s} predictive replicates from {n_draws} draws: sampling with replacement");
        ((0..s).map(|_| rng.random_range(0..n_draws)).collect(), true)
    }
}

fn draw_count<R: Rng + ?Sized>(
    family: CountFamily,
    lambda: f64,
    nu: f64,
    truncated: bool,
    policy: &TruncationPolicy,
    rng: &mut R,
) -> Result<u64, DiagnosticsError> {
    if family == CountFamily::Poisson && !truncated {
        let d = Poisson::new(lambda).map_err(|_| CmpError::InvalidParameter { lambda, nu })?;
        return Ok(d.sample(rng) as u64);
    }
    let params = CmpParams::new(lambda, nu)?;
    Ok(if truncated {
        cmp::zt_sample(&params, policy, rng)?
    } else {
        cmp::sample(&params, policy, rng)?
    })
}

/// Simulates `s` replicates of the responses for the rows of `data` (only
/// its design and offsets are used). Chain rows are drawn without
/// replacement when the chain is long enough.
pub fn posterior_predictive<R: Rng + ?Sized>(
    model: PredictiveModel<'_>,
    data: &RegressionData,
    s: usize,
    rng: &mut R,
) -> Result<PredictiveSample, DiagnosticsError> {
    let policy = TruncationPolicy::default();
    let m = data.len();
    match model {
        PredictiveModel::Ordinary(fit) => {
            let family = match fit.component {
                Component::OrdinaryPoisson => CountFamily::Poisson,
                Component::OrdinaryCmp => CountFamily::Cmp,
                _ => return Err(DiagnosticsError::UnsupportedModel(fit.component.name())),
            };
            let n_draws = fit.chain.n_draws();
            if n_draws == 0 {
                return Err(DiagnosticsError::InsufficientDraws { needed: 1, got: 0 });
            }
            let (rows, with_replacement) = pick_rows(n_draws, s, rng);
            let mut draws = Vec::with_capacity(s);
            for &r in &rows {
                let theta = &fit.chain.draws[r];
                let eta = fit.component.linear_predictor(data, theta);
                let nu = fit.component.nu_at(theta);
                let rep = eta
                    .iter()
                    .map(|e| draw_count(family, e.exp(), nu, false, &policy, rng))
                    .collect::<Result<Vec<_>, _>>()?;
                draws.push(rep);
            }
            Ok(PredictiveSample {
                draws,
                param_index: rows,
                with_replacement,
            })
        }
        PredictiveModel::Hurdle(fit) => {
            let family = match fit.positive.component {
                Component::ZeroTruncated { family } => family,
                _ => return Err(DiagnosticsError::UnsupportedModel(fit.positive.component.name())),
            };
            let n_draws = fit.binary.chain.n_draws().min(fit.positive.chain.n_draws());
            if n_draws == 0 {
                return Err(DiagnosticsError::InsufficientDraws { needed: 1, got: 0 });
            }
            let (rows, with_replacement) = pick_rows(n_draws, s, rng);
            let mut draws = Vec::with_capacity(s);
            for &r in &rows {
                let beta = &fit.binary.chain.draws[r];
                let gamma_row = &fit.positive.chain.draws[r];
                let link = fit.binary.component.link_at(beta).expect("binary component");
                let eta_bin = fit.binary.component.linear_predictor(data, beta);
                let eta_pos = fit.positive.component.linear_predictor(data, gamma_row);
                let nu = fit.positive.component.nu_at(gamma_row);
                let mut rep = Vec::with_capacity(m);
                for i in 0..m {
                    let p = link.prob_event(eta_bin[i]);
                    let y = if rng.random::<f64>() < p {
                        draw_count(family, eta_pos[i].exp(), nu, true, &policy, rng)?
                    } else {
                        0
                    };
                    rep.push(y);
                }
                draws.push(rep);
            }
            Ok(PredictiveSample {
                draws,
                param_index: rows,
                with_replacement,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationMetrics {
    pub mse: f64,
    pub mae: f64,
    pub ks: f64,
}

/// MSE and MAE of the predictive means against the observations, and the KS
/// distance between the pooled replicate ECDF and the observed ECDF over the
/// integer grid `0..=max(y_observed)`.
pub fn validation_metrics(
    y_observed: &[u64],
    y_predicted_mean: &[f64],
    predictive_draws: &[Vec<u64>],
) -> Result<ValidationMetrics, DiagnosticsError> {
    let m = y_observed.len();
    if y_predicted_mean.len() != m {
        return Err(DiagnosticsError::LengthMismatch(m, y_predicted_mean.len()));
    }
    if let Some(bad) = predictive_draws.iter().find(|d| d.len() != m) {
        return Err(DiagnosticsError::LengthMismatch(m, bad.len()));
    }
    if m == 0 {
        return Err(DiagnosticsError::InsufficientDraws { needed: 1, got: 0 });
    }
    let (mut se, mut ae) = (0.0, 0.0);
    for (&y, &p) in y_observed.iter().zip(y_predicted_mean) {
        let e = y as f64 - p;
        se += e * e;
        ae += e.abs();
    }

    let y_max = *y_observed.iter().max().unwrap_or(&0) as usize;
    let mut obs_counts = vec![0usize; y_max + 1];
    for &y in y_observed {
        obs_counts[y as usize] += 1;
    }
    let mut pred_counts = vec![0usize; y_max + 1];
    let mut pooled = 0usize;
    for rep in predictive_draws {
        for &v in rep {
            pooled += 1;
            if (v as usize) <= y_max {
                pred_counts[v as usize] += 1;
            }
        }
    }
    let mut ks = 0.0f64;
    if pooled > 0 {
        let (mut co, mut cp) = (0usize, 0usize);
        for k in 0..=y_max {
            co += obs_counts[k];
            cp += pred_counts[k];
            ks = ks.max((co as f64 / m as f64 - cp as f64 / pooled as f64).abs());
        }
    }
    Ok(ValidationMetrics {
        mse: se / m as f64,
        mae: ae / m as f64,
        ks,
    })
}

/// Posterior summary of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub hw_stationary: Option<bool>,
    pub mcse: f64,
}

/// Mean, 95% HPD, Heidelberger-Welch verdict and MC standard error per column.
pub fn summarize_chain(chain: &PosteriorChain) -> Result<Vec<ParameterSummary>, DiagnosticsError> {
    chain
        .param_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = chain.column(j);
            let hpd = hpd_interval(&col, 0.95)?;
            let hw = heidelberger_welch(&col).ok().map(|h| h.stationary);
            Ok(ParameterSummary {
                name: name.clone(),
                mean: mean(&col),
                hpd_low: hpd.lower,
                hpd_high: hpd.upper,
                hw_stationary: hw,
                mcse: mcse(&col),
            })
        })
        .collect()
}
