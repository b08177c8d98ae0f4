//! Binary-regression links under the latent-variable formulation.
//!
//! An event is observed when `z = η + u > 0`, so `p = P(u > -η) = 1 - F(-η)`.
//! For the probit link `F = Φ(·/σ)` and the two readings agree. For the skewed
//! Weibull link, whose error distribution only lives on `u > 0`, the latent
//! form gives `p = exp(-(-η/σ)^α)` for `η < 0` and `p = 1` otherwise. The plain
//! CDF form `p = F_SW(η)` is kept behind [`WeibullConvention::Cdf`].

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;
use thiserror::Error;

/// Clamp applied when [`LinkSpec::clamp`] is set.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("invalid link parameters: alpha = {alpha}, sigma = {sigma}")]
    InvalidParameter { alpha: f64, sigma: f64 },
    #[error("length mismatch: {outcomes} outcomes vs {predictors} linear predictors")]
    LengthMismatch { outcomes: usize, predictors: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkFamily {
    Probit,
    SkewedWeibull,
}

impl LinkFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LinkFamily::Probit => "probit",
            LinkFamily::SkewedWeibull => "skewed_weibull",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeibullConvention {
    /// `p = 1 - F_SW(-η)`.
    #[default]
    Latent,
    /// `p = F_SW(η)`.
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub family: LinkFamily,
    /// Weibull shape; ignored by the probit link.
    pub alpha: f64,
    pub sigma: f64,
    #[serde(default)]
    pub convention: WeibullConvention,
    /// Clamp probabilities into `[1e-12, 1 - 1e-12]` instead of letting the
    /// deterministic region produce an impossible likelihood.
    #[serde(default)]
    pub clamp: bool,
}

impl LinkSpec {
    pub fn probit() -> Self {
        Self {
            family: LinkFamily::Probit,
            alpha: 1.0,
            sigma: 1.0,
            convention: WeibullConvention::Latent,
            clamp: false,
        }
    }

    pub fn skewed_weibull(alpha: f64) -> Self {
        Self {
            family: LinkFamily::SkewedWeibull,
            alpha,
            sigma: 1.0,
            convention: WeibullConvention::Latent,
            clamp: false,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_convention(mut self, convention: WeibullConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.sigma) && (self.family == LinkFamily::Probit || ok(self.alpha)) {
            Ok(())
        } else {
            Err(LinkError::InvalidParameter {
                alpha: self.alpha,
                sigma: self.sigma,
            })
        }
    }

    /// Probability of an event for linear predictor `eta`.
    pub fn prob_event(&self, eta: f64) -> f64 {
        let (log_p, _) = self.log_probs(eta);
        log_p.exp()
    }

    /// `(ln p, ln(1 - p))`, each computed directly on the log scale.
    pub fn log_probs(&self, eta: f64) -> (f64, f64) {
        let (lp, lq) = match self.family {
            LinkFamily::Probit => {
                let t = eta / self.sigma;
                (ln_std_normal_cdf(t), ln_std_normal_cdf(-t))
            }
            LinkFamily::SkewedWeibull => match self.convention {
                WeibullConvention::Latent => {
                    if eta >= 0.0 {
                        (0.0, f64::NEG_INFINITY)
                    } else {
                        let h = (-eta / self.sigma).powf(self.alpha);
                        (-h, ln_one_minus_exp_neg(h))
                    }
                }
                WeibullConvention::Cdf => {
                    if eta <= 0.0 {
                        (f64::NEG_INFINITY, 0.0)
                    } else {
                        let h = (eta / self.sigma).powf(self.alpha);
                        (ln_one_minus_exp_neg(h), -h)
                    }
                }
            },
        };
        if self.clamp {
            let lo = PROB_CLAMP.ln();
            let hi = (-PROB_CLAMP).ln_1p();
            (lp.clamp(lo, hi), lq.clamp(lo, hi))
        } else {
            (lp, lq)
        }
    }
}

/// `ln(1 - e^{-h})` for `h >= 0`.
fn ln_one_minus_exp_neg(h: f64) -> f64 {
    if h > std::f64::consts::LN_2 {
        (-(-h).exp()).ln_1p()
    } else {
        (-(-h).exp_m1()).ln()
    }
}

/// `Φ(x)` via the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln Φ(x)`, switching to the asymptotic series deep in the lower tail.
pub fn ln_std_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        let v = std_normal_cdf(x);
        if x > 0.0 {
            (-0.5 * erfc(x / std::f64::consts::SQRT_2)).ln_1p()
        } else {
            v.ln()
        }
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
    }
}

/// Standard deviation of a unit-scale Weibull with shape `alpha`.
fn weibull_sd(alpha: f64) -> f64 {
    let g1 = gamma(1.0 + 1.0 / alpha);
    (gamma(1.0 + 2.0 / alpha) - g1 * g1).sqrt()
}

/// Scale that puts skewed-Weibull coefficients on the probit (`σ = 1`) scale.
///
/// Grows without bound as `alpha → ∞`, since the Weibull variance vanishes.
pub fn sw_equivalent_scale(alpha: f64) -> f64 {
    1.0 / weibull_sd(alpha)
}

/// Scale that puts probit coefficients on the unit-scale Weibull scale.
pub fn probit_equivalent_scale(alpha: f64) -> f64 {
    weibull_sd(alpha)
}

/// Inverse of the CDF-convention Weibull link: `g(p) = σ [-ln(1 - p)]^{1/α}`.
pub fn weibull_cdf_inverse_link(p: f64, alpha: f64, sigma: f64) -> f64 {
    sigma * (-(-p).ln_1p()).powf(1.0 / alpha)
}

/// Bernoulli log-likelihood `Σ y ln p + (1 - y) ln(1 - p)`.
///
/// Returns `-∞` when an outcome falls in the region where the link assigns it
/// probability zero.
pub fn binary_loglik(y_plus: &[bool], etas: &[f64], link: &LinkSpec) -> Result<f64, LinkError> {
    if y_plus.len() != etas.len() {
        return Err(LinkError::LengthMismatch {
            outcomes: y_plus.len(),
            predictors: etas.len(),
        });
    }
    link.validate()?;
    let mut total = 0.0;
    for (&y, &eta) in y_plus.iter().zip(etas) {
        let (lp, lq) = link.log_probs(eta);
        total += if y { lp } else { lq };
        if total == f64::NEG_INFINITY {
            return Ok(total);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn probit_midpoint_and_symmetry() {
        let l = LinkSpec::probit();
        assert!((l.prob_event(0.0) - 0.5).abs() < 1e-15);
        for i in 0..200 {
            let eta = -8.0 + 0.08 * i as f64;
            assert!((l.prob_event(-eta) - (1.0 - l.prob_event(eta))).abs() < 1e-14);
        }
    }

    #[test]
    fn latent_weibull_values() {
        let l = LinkSpec::skewed_weibull(3.0);
        assert!((l.prob_event(-1.0) - 0.367_879_4).abs() < 1e-7);
        assert_eq!(l.prob_event(0.0), 1.0);
        assert_eq!(l.prob_event(2.0), 1.0);
        assert!(l.prob_event(-50.0) < 1e-300);
        // left-continuity at zero
        assert!((l.prob_event(-1e-9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weibull_is_asymmetric() {
        let l = LinkSpec::skewed_weibull(2.0);
        let asym = (0..100)
            .map(|i| -3.0 + 0.06 * i as f64)
            .any(|eta| (l.prob_event(-eta) - (1.0 - l.prob_event(eta))).abs() > 1e-3);
        assert!(asym);
    }

    #[test]
    fn monotone_in_eta() {
        for link in [
            LinkSpec::probit(),
            LinkSpec::skewed_weibull(3.0),
            LinkSpec::skewed_weibull(0.7).with_convention(WeibullConvention::Cdf),
        ] {
            let mut prev = 0.0;
            for i in 0..1000 {
                let p = link.prob_event(-10.0 + 0.02 * i as f64);
                assert!(p >= prev);
                prev = p;
            }
        }
    }

    #[test]
    fn cdf_inverse_link_round_trip() {
        let l = LinkSpec::skewed_weibull(2.5).with_convention(WeibullConvention::Cdf);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let eta = weibull_cdf_inverse_link(p, 2.5, 1.0);
            assert!((l.prob_event(eta) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn equivalent_scales() {
        assert!((sw_equivalent_scale(1.0) - 1.0).abs() < 1e-12);
        let expected = 1.0 / (1.0 - std::f64::consts::PI / 4.0).sqrt();
        assert!((sw_equivalent_scale(2.0) - expected).abs() < 1e-10);
        assert!((sw_equivalent_scale(2.0) - 2.1587).abs() < 1e-4);
        assert!((probit_equivalent_scale(2.0) - 0.46325).abs() < 1e-5);
        for a in [0.3, 1.0, 1.7, 3.0, 12.0] {
            assert!((sw_equivalent_scale(a) * probit_equivalent_scale(a) - 1.0).abs() < 1e-12);
        }
        assert!(sw_equivalent_scale(200.0) > sw_equivalent_scale(20.0));
    }

    #[test]
    fn loglik_edges() {
        let half = binary_loglik(&[true], &[0.0], &LinkSpec::probit()).unwrap();
        assert!((half - 0.5f64.ln()).abs() < 1e-15);
        let imp = binary_loglik(&[false], &[1.0], &LinkSpec::skewed_weibull(3.0)).unwrap();
        assert_eq!(imp, f64::NEG_INFINITY);
        let clamped = binary_loglik(
            &[false],
            &[1.0],
            &LinkSpec::skewed_weibull(3.0).with_clamp(true),
        )
        .unwrap();
        assert!((clamped - PROB_CLAMP.ln()).abs() < 1e-9);
        assert!(matches!(
            binary_loglik(&[true, false], &[0.0], &LinkSpec::probit()),
            Err(LinkError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn loglik_matches_naive_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let y: Vec<bool> = (0..20).map(|_| rng.random::<bool>()).collect();
        let etas: Vec<f64> = (0..20).map(|_| rng.random_range(-2.5..-0.1)).collect();
        for link in [LinkSpec::probit(), LinkSpec::skewed_weibull(1.8)] {
            let naive: f64 = y
                .iter()
                .zip(&etas)
                .map(|(&yi, &e)| {
                    let p = link.prob_event(e);
                    if yi { p.ln() } else { (1.0 - p).ln() }
                })
                .sum();
            let got = binary_loglik(&y, &etas, &link).unwrap();
            assert!((got - naive).abs() < 1e-10, "{got} vs {naive}");
        }
    }

    #[test]
    fn log_cdf_tail() {
        // ln Φ(-40) ≈ -804.608...
        let v = ln_std_normal_cdf(-40.0);
        assert!((v - -804.608_442_013_754_5).abs() < 1e-6, "{v}");
        assert!((ln_std_normal_cdf(-29.99) - ln_std_normal_cdf(-30.01)).abs() < 0.61);
    }
}
