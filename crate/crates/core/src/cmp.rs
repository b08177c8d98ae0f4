//! Conway-Maxwell-Poisson distribution.
//!
//! The pmf is `P(n) = λ^n / (n!)^ν / Z(λ, ν)` with `Z(λ, ν) = Σ_j λ^j / (j!)^ν`.
//! `Z` has no closed form, so every quantity here is computed from a truncated
//! series whose omitted tail is bounded by a geometric envelope: once the term
//! ratio `ε_k = λ / (k + 1)^ν` drops below one, the tail after index `k` is at
//! most `λ^(k+1) / ((k+1)!)^ν / (1 - ε_k)`.
//!
//! All terms are accumulated in log space; `(n!)^ν` overflows long before the
//! series has converged for moderate `λ`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmpError {
    #[error("invalid CMP parameters: lambda = {lambda}, nu = {nu}")]
    InvalidParameter { lambda: f64, nu: f64 },
    #[error("CMP series diverges for nu = 0 and lambda = {lambda} >= 1")]
    DivergentSeries { lambda: f64 },
    #[error("truncation budget of {max_terms} terms exhausted before the tail bound reached {tail_tol:e}")]
    TruncationBudgetExceeded { max_terms: usize, tail_tol: f64 },
    #[error("invalid truncation policy: tail_tol = {tail_tol}, max_terms = {max_terms}")]
    InvalidPolicy { tail_tol: f64, max_terms: usize },
    #[error("zero-truncated pmf is undefined at n = 0")]
    DomainError,
}

/// `(λ, ν)` pair of a CMP distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmpParams {
    lambda: f64,
    nu: f64,
}

impl CmpParams {
    pub fn new(lambda: f64, nu: f64) -> Result<Self, CmpError> {
        if !(lambda.is_finite() && lambda > 0.0 && nu.is_finite() && nu >= 0.0) {
            return Err(CmpError::InvalidParameter { lambda, nu });
        }
        if nu == 0.0 && lambda >= 1.0 {
            return Err(CmpError::DivergentSeries { lambda });
        }
        Ok(Self { lambda, nu })
    }

    /// Ordinary Poisson with rate `lambda`.
    pub fn poisson(lambda: f64) -> Result<Self, CmpError> {
        Self::new(lambda, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Unnormalized log mass `n ln λ - ν ln n!`.
    pub fn log_kernel(&self, n: u64) -> f64 {
        n as f64 * self.lambda.ln() - self.nu * ln_factorial(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Absolute bound on the discarded tail mass of the series.
    pub tail_tol: f64,
    /// Hard cap on the number of summed terms.
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_tol: 1e-10,
            max_terms: 10_000,
        }
    }
}

impl TruncationPolicy {
    pub fn new(tail_tol: f64, max_terms: usize) -> Result<Self, CmpError> {
        let policy = Self {
            tail_tol,
            max_terms,
        };
        policy.validate()?;
        Ok(policy)
    }

    fn validate(&self) -> Result<(), CmpError> {
        if !(self.tail_tol.is_finite() && self.tail_tol > 0.0) || self.max_terms < 2 {
            return Err(CmpError::InvalidPolicy {
                tail_tol: self.tail_tol,
                max_terms: self.max_terms,
            });
        }
        Ok(())
    }
}

/// Truncated value of `Z(λ, ν)` together with its certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZResult {
    pub value: f64,
    pub log_value: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

/// Running log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            self.scaled = self.scaled * (self.max - log_term).exp() + 1.0;
            self.max = log_term;
        } else {
            self.scaled += (log_term - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        self.max + self.scaled.ln()
    }
}

/// Walks the log terms `ln(λ^j / (j!)^ν)` for `j = 0, 1, ...` and stops as soon
/// as the tail after the current index is certified below `tail_tol`. The
/// visitor sees every summed term.
fn walk_series<F: FnMut(usize, f64)>(
    params: &CmpParams,
    policy: &TruncationPolicy,
    first: usize,
    mut visit: F,
) -> Result<(usize, f64), CmpError> {
    policy.validate()?;
    let ln_lambda = params.lambda.ln();
    let nu = params.nu;
    let ln_tol = policy.tail_tol.ln();

    // Index after which λ/(k+1)^ν < 1. Beyond the budget there is no point in summing.
    if nu > 0.0 {
        let turn = (ln_lambda / nu).exp();
        if turn >= policy.max_terms as f64 {
            return Err(CmpError::TruncationBudgetExceeded {
                max_terms: policy.max_terms,
                tail_tol: policy.tail_tol,
            });
        }
    }

    let mut log_term = 0.0;
    for k in 0..policy.max_terms {
        if k > 0 {
            log_term += ln_lambda - nu * (k as f64).ln();
        }
        visit(k, log_term);

        let k1 = (k + 1) as f64;
        let eps = (ln_lambda - nu * k1.ln()).exp();
        if eps < 1.0 && k >= first {
            let next = log_term + ln_lambda - nu * k1.ln();
            let log_bound = next - (-eps).ln_1p();
            if log_bound <= ln_tol {
                return Ok((k + 1, log_bound.exp()));
            }
        }
    }
    Err(CmpError::TruncationBudgetExceeded {
        max_terms: policy.max_terms,
        tail_tol: policy.tail_tol,
    })
}

/// Truncated `Z(λ, ν)` with the omitted tail certified below `policy.tail_tol`.
pub fn normalizing_constant(
    params: &CmpParams,
    policy: &TruncationPolicy,
) -> Result<ZResult, CmpError> {
    let mut acc = LogSum::new();
    let (terms_used, tail_bound) = walk_series(params, policy, 0, |_, l| acc.add(l))?;
    let log_value = if params.nu == 1.0 { params.lambda } else { acc.value() };
    Ok(ZResult {
        value: log_value.exp(),
        log_value,
        terms_used,
        tail_bound,
    })
}

/// `ln Z(λ, ν)`. At `ν = 1` this is exactly `λ`.
pub fn log_normalizing_constant(
    params: &CmpParams,
    policy: &TruncationPolicy,
) -> Result<f64, CmpError> {
    if params.nu == 1.0 {
        return Ok(params.lambda);
    }
    normalizing_constant(params, policy).map(|z| z.log_value)
}

/// `ln(Z(λ, ν) - 1)`, summed from `j = 1` so that small `λ` keeps full precision.
pub fn log_normalizing_constant_minus_one(
    params: &CmpParams,
    policy: &TruncationPolicy,
) -> Result<f64, CmpError> {
    if params.nu == 1.0 {
        return Ok(params.lambda + (-(-params.lambda).exp_m1()).ln());
    }
    let mut acc = LogSum::new();
    walk_series(params, policy, 1, |k, l| {
        if k > 0 {
            acc.add(l)
        }
    })?;
    Ok(acc.value())
}

pub fn log_pmf(n: u64, params: &CmpParams, policy: &TruncationPolicy) -> Result<f64, CmpError> {
    Ok(params.log_kernel(n) - log_normalizing_constant(params, policy)?)
}

pub fn pmf(n: u64, params: &CmpParams, policy: &TruncationPolicy) -> Result<f64, CmpError> {
    log_pmf(n, params, policy).map(f64::exp)
}

/// Log mass of the zero-truncated CMP: `ln(λ^n / (n!)^ν) - ln(Z - 1)` for `n >= 1`.
pub fn zt_log_pmf(n: u64, params: &CmpParams, policy: &TruncationPolicy) -> Result<f64, CmpError> {
    if n == 0 {
        return Err(CmpError::DomainError);
    }
    Ok(params.log_kernel(n) - log_normalizing_constant_minus_one(params, policy)?)
}

pub fn zt_pmf(n: u64, params: &CmpParams, policy: &TruncationPolicy) -> Result<f64, CmpError> {
    zt_log_pmf(n, params, policy).map(f64::exp)
}

/// Mean and variance by direct weighted summation.
///
/// The `n²`-weighted tail decays more slowly than the tail of `Z`, so the
/// series is walked with a tolerance a millionfold tighter than `policy`.
pub fn moments(params: &CmpParams, policy: &TruncationPolicy) -> Result<(f64, f64), CmpError> {
    let tight = TruncationPolicy {
        tail_tol: (policy.tail_tol * 1e-6).max(f64::MIN_POSITIVE),
        max_terms: policy.max_terms,
    };
    let mut log_terms = Vec::new();
    walk_series(params, &tight, 0, |_, l| log_terms.push(l))?;
    let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (n, l) in log_terms.iter().enumerate() {
        let w = (l - max).exp();
        let n = n as f64;
        s0 += w;
        s1 += n * w;
        s2 += n * n * w;
    }
    let mean = s1 / s0;
    let variance = (s2 / s0 - mean * mean).max(0.0);
    Ok((mean, variance))
}

fn invert<R: Rng + ?Sized>(
    params: &CmpParams,
    policy: &TruncationPolicy,
    first: usize,
    rng: &mut R,
) -> Result<u64, CmpError> {
    let mut log_terms = Vec::with_capacity(32);
    walk_series(params, policy, first, |k, l| {
        if k >= first {
            log_terms.push(l)
        }
    })?;
    let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_terms.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cumulative += w;
        if target < cumulative {
            return Ok((first + i) as u64);
        }
    }
    Ok((first + weights.len() - 1) as u64)
}

/// Draw by inversion of the truncated CDF.
pub fn sample<R: Rng + ?Sized>(
    params: &CmpParams,
    policy: &TruncationPolicy,
    rng: &mut R,
) -> Result<u64, CmpError> {
    invert(params, policy, 0, rng)
}

/// Draw from the zero-truncated distribution (support `n >= 1`).
pub fn zt_sample<R: Rng + ?Sized>(
    params: &CmpParams,
    policy: &TruncationPolicy,
    rng: &mut R,
) -> Result<u64, CmpError> {
    invert(params, policy, 1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn p(lambda: f64, nu: f64) -> CmpParams {
        CmpParams::new(lambda, nu).unwrap()
    }

    fn tol(t: f64) -> TruncationPolicy {
        TruncationPolicy::new(t, 10_000).unwrap()
    }

    #[test]
    fn poisson_constant_is_exp_lambda() {
        let z = normalizing_constant(&p(1.5, 1.0), &tol(1e-10)).unwrap();
        assert!((z.value - 4.481_689_070_3).abs() < 1e-9);
        assert!((z.value - 1.5f64.exp()).abs() < 1e-10);
        assert!(z.tail_bound <= 1e-10);
        assert!(z.value >= 1.0);
    }

    #[test]
    fn tiny_lambda_leaves_only_first_term() {
        let z = normalizing_constant(&p(1e-300, 0.7), &TruncationPolicy::default()).unwrap();
        assert_eq!(z.value, 1.0);
        assert_eq!(z.terms_used, 1);
        assert!((zt_pmf(1, &p(1e-12, 2.5), &TruncationPolicy::default()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn divergent_and_invalid_parameters_are_rejected() {
        assert_eq!(
            CmpParams::new(1.0, 0.0),
            Err(CmpError::DivergentSeries { lambda: 1.0 })
        );
        assert!(matches!(
            CmpParams::new(-1.0, 1.0),
            Err(CmpError::InvalidParameter { .. })
        ));
        assert!(matches!(
            CmpParams::new(1.0, f64::NAN),
            Err(CmpError::InvalidParameter { .. })
        ));
        // geometric series for nu = 0
        let z = normalizing_constant(&p(0.5, 0.0), &tol(1e-12)).unwrap();
        assert!((z.value - 2.0).abs() < 1e-11);
    }

    #[test]
    fn budget_is_enforced() {
        let policy = TruncationPolicy::new(1e-10, 20).unwrap();
        assert!(matches!(
            normalizing_constant(&p(50.0, 1.0), &policy),
            Err(CmpError::TruncationBudgetExceeded { .. })
        ));
        assert!(TruncationPolicy::new(0.0, 10).is_err());
        assert!(TruncationPolicy::new(1e-3, 1).is_err());
    }

    #[test]
    fn zt_pmf_rejects_zero() {
        assert_eq!(
            zt_pmf(0, &p(1.0, 1.0), &TruncationPolicy::default()),
            Err(CmpError::DomainError)
        );
    }

    #[test]
    fn poisson_pmf_and_zt_closed_forms() {
        let d = TruncationPolicy::default();
        let v = pmf(2, &p(1.5, 1.0), &d).unwrap();
        assert!((v - 0.251_021_4).abs() < 1e-7);
        assert!((v - (-1.5f64).exp() * 1.125).abs() < 1e-9);
        let zt = zt_pmf(1, &p(1.5, 1.0), &d).unwrap();
        assert!((zt - 1.5 / (1.5f64.exp() - 1.0)).abs() < 1e-9);
        assert!((zt - 0.430_825_4).abs() < 1e-7);
    }

    #[test]
    fn ratio_identity() {
        let d = TruncationPolicy::default();
        let prm = p(2.0, 0.7);
        let r = pmf(2, &prm, &d).unwrap() / pmf(3, &prm, &d).unwrap();
        assert!((r / (3f64.powf(0.7) / 2.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn poisson_moments() {
        let (m, v) = moments(&p(2.0, 1.0), &TruncationPolicy::default()).unwrap();
        assert!((m - 2.0).abs() < 1e-9 && (v - 2.0).abs() < 1e-9, "{m} {v}");
        let (m, _) = moments(&p(1e-9, 3.0), &TruncationPolicy::default()).unwrap();
        assert!(m < 1e-8);
        let (m, v) = moments(&p(2.0, 0.5), &TruncationPolicy::default()).unwrap();
        assert!(v > m);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let prm = p(2.0, 0.6);
        let d = TruncationPolicy::default();
        let draw = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..200)
                .map(|_| sample(&prm, &d, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn degenerate_samples() {
        let d = TruncationPolicy::default();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(sample(&p(1e-14, 2.0), &d, &mut rng).unwrap(), 0);
            assert_eq!(zt_sample(&p(1e-14, 1.0), &d, &mut rng).unwrap(), 1);
        }
    }
}
