use super::{ModelError, PriorSpec, RegressionData};
use crate::cmp::{self, CmpParams, TruncationPolicy};
use crate::diagnostics::{dic, DicResult};
use crate::links::{binary_loglik, LinkFamily, LinkSpec, WeibullConvention};
use crate::mcmc::{run_chain, Block, ChainConfig, FnTarget, PosteriorChain, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountFamily {
    Poisson,
    Cmp,
}

/// One fittable model: its parameter layout, likelihood and prior.
///
/// Parameters are the regression coefficients (one per design column)
/// followed by `nu` for CMP families or `alpha` for the skewed-Weibull link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    OrdinaryPoisson,
    /// Ordinary CMP regression, sampled with the exchange algorithm.
    OrdinaryCmp,
    /// Binary gate on `y > 0`. The link's `alpha` is only the starting value
    /// when the family is skewed Weibull. `offset` adds the log exposure to
    /// the gate's linear predictor.
    Binary { link: LinkSpec, offset: bool },
    ZeroTruncated { family: CountFamily },
}

impl Component {
    pub fn name(&self) -> &'static str {
        match self {
            Component::OrdinaryPoisson => "poisson",
            Component::OrdinaryCmp => "cmp",
            Component::Binary { link, .. } => link.family.name(),
            Component::ZeroTruncated { family: CountFamily::Poisson } => "ztp",
            Component::ZeroTruncated { family: CountFamily::Cmp } => "ztcmp",
        }
    }

    fn coef_prefix(&self) -> &'static str {
        match self {
            Component::ZeroTruncated { .. } => "gamma",
            _ => "beta",
        }
    }

    /// Name of the trailing positive parameter, if any.
    pub fn extra_param(&self) -> Option<&'static str> {
        match self {
            Component::OrdinaryCmp | Component::ZeroTruncated { family: CountFamily::Cmp } => Some("nu"),
            Component::Binary { link, .. } if link.family == LinkFamily::SkewedWeibull => Some("alpha"),
            _ => None,
        }
    }

    pub fn param_names(&self, data: &RegressionData) -> Vec<String> {
        let prefix = self.coef_prefix();
        data.names
            .iter()
            .map(|n| format!("{prefix}_{n}"))
            .chain(self.extra_param().map(String::from))
            .collect()
    }

    pub fn n_params(&self, data: &RegressionData) -> usize {
        data.n_coef() + usize::from(self.extra_param().is_some())
    }

    fn uses_offset(&self) -> bool {
        match self {
            Component::Binary { offset, .. } => *offset,
            _ => true,
        }
    }

    pub fn check_data(&self, data: &RegressionData) -> Result<(), ModelError> {
        match self {
            Component::Binary { link, .. } => {
                link.validate()?;
            }
            Component::ZeroTruncated { .. } if data.y.contains(&0) => {
                return Err(ModelError::InvalidData(
                    "zero-truncated component needs positive counts only".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Starting values: coefficients at zero, `nu` and `alpha` at one. The
    /// skewed-Weibull gate is deterministic on one side of zero, so its
    /// intercept starts where every linear predictor sits one unit inside
    /// the region that gives both outcomes positive probability.
    pub fn init(&self, data: &RegressionData) -> Vec<f64> {
        let mut theta = vec![0.0; self.n_params(data)];
        if let Component::Binary { link, offset } = self {
            if link.family == LinkFamily::SkewedWeibull {
                let offsets = data.offset.iter().map(|&o| if *offset { o } else { 0.0 });
                let intercept_col = data.names.iter().position(|n| n == "intercept").unwrap_or(0);
                theta[intercept_col] = match link.convention {
                    WeibullConvention::Latent => -1.0 - offsets.fold(f64::NEG_INFINITY, f64::max),
                    WeibullConvention::Cdf => 1.0 - offsets.fold(f64::INFINITY, f64::min),
                };
            }
        }
        if self.extra_param().is_some() {
            let last = theta.len() - 1;
            theta[last] = match self {
                Component::Binary { link, .. } => link.alpha,
                _ => 1.0,
            };
        }
        theta
    }

    pub fn blocks(&self, data: &RegressionData) -> Vec<Block> {
        let p = data.n_coef();
        let mut blocks = vec![Block::gaussian(0..p)];
        if self.extra_param().is_some() {
            blocks.push(Block::log_normal([p]));
        }
        blocks
    }

    /// Link at the given parameters (binary components only).
    pub fn link_at(&self, theta: &[f64]) -> Option<LinkSpec> {
        match self {
            Component::Binary { link, .. } => {
                let mut l = *link;
                if self.extra_param().is_some() {
                    l.alpha = theta[theta.len() - 1];
                }
                Some(l)
            }
            _ => None,
        }
    }

    /// Linear predictor at `theta` (offset included where the component uses it).
    pub fn linear_predictor(&self, data: &RegressionData, theta: &[f64]) -> nalgebra::DVector<f64> {
        data.linear_predictor(&theta[..data.n_coef()], self.uses_offset())
    }

    /// Dispersion `ν` at `theta` (1 for Poisson families).
    pub fn nu_at(&self, theta: &[f64]) -> f64 {
        match self.extra_param() {
            Some("nu") => theta[theta.len() - 1],
            _ => 1.0,
        }
    }

    /// Full log-likelihood, normalizing constants included. Infeasible or
    /// numerically unreachable parameters give `-∞`.
    pub fn loglik(&self, data: &RegressionData, theta: &[f64], policy: &TruncationPolicy) -> f64 {
        let eta = self.linear_predictor(data, theta);
        let value = match self {
            Component::OrdinaryPoisson => data
                .y
                .iter()
                .zip(eta.iter())
                .map(|(&y, &e)| y as f64 * e - e.exp() - ln_factorial(y))
                .sum(),
            Component::OrdinaryCmp => {
                let nu = self.nu_at(theta);
                let mut total = 0.0;
                for (&y, &e) in data.y.iter().zip(eta.iter()) {
                    let Ok(params) = CmpParams::new(e.exp(), nu) else {
                        return f64::NEG_INFINITY;
                    };
                    match cmp::log_pmf(y, &params, policy) {
                        Ok(l) => total += l,
                        Err(_) => return f64::NEG_INFINITY,
                    }
                }
                total
            }
            Component::ZeroTruncated { .. } => {
                let nu = self.nu_at(theta);
                let mut total = 0.0;
                for (&y, &e) in data.y.iter().zip(eta.iter()) {
                    let Ok(params) = CmpParams::new(e.exp(), nu) else {
                        return f64::NEG_INFINITY;
                    };
                    match cmp::zt_log_pmf(y, &params, policy) {
                        Ok(l) => total += l,
                        Err(_) => return f64::NEG_INFINITY,
                    }
                }
                total
            }
            Component::Binary { .. } => {
                let link = self.link_at(theta).expect("binary component");
                if link.validate().is_err() {
                    return f64::NEG_INFINITY;
                }
                binary_loglik(&data.y_plus(), eta.as_slice(), &link).unwrap_or(f64::NEG_INFINITY)
            }
        };
        if value.is_nan() {
            f64::NEG_INFINITY
        } else {
            value
        }
    }

    pub fn log_prior(&self, prior: &PriorSpec, theta: &[f64], n_coef: usize) -> f64 {
        let mut lp = prior.log_coef(&theta[..n_coef]);
        match self.extra_param() {
            Some("nu") => lp += prior.log_nu(theta[n_coef]),
            Some("alpha") => lp += prior.log_alpha(theta[n_coef]),
            _ => {}
        }
        lp
    }
}

/// A component together with its posterior chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedComponent {
    pub component: Component,
    pub chain: PosteriorChain,
}

impl FittedComponent {
    /// DIC of the chain against the data it was fitted to.
    pub fn dic(&self, data: &RegressionData) -> Result<DicResult, ModelError> {
        let policy = TruncationPolicy::default();
        dic(&self.chain, |theta| self.component.loglik(data, theta, &policy))
            .map_err(|_| ModelError::NonFiniteDeviance)
    }
}

/// Unnormalized CMP regression posterior for the exchange algorithm.
///
/// `log_density` drops every `ln Z(λ_i, ν)`; the auxiliary term supplies the
/// ratio that cancels them in expectation.
struct ExchangeTarget<'a> {
    data: &'a RegressionData,
    prior: &'a PriorSpec,
    policy: TruncationPolicy,
    ln_fact: Vec<f64>,
}

impl ExchangeTarget<'_> {
    fn log_h(&self, counts: &[u64], ln_fact: &[f64], eta: &[f64], nu: f64) -> f64 {
        counts
            .iter()
            .zip(ln_fact)
            .zip(eta)
            .map(|((&n, lf), e)| n as f64 * e - nu * lf)
            .sum()
    }
}

impl Target for ExchangeTarget<'_> {
    fn log_density(&self, theta: &[f64]) -> f64 {
        let p = self.data.n_coef();
        let nu = theta[p];
        if nu.is_nan() || nu <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let eta = self.data.linear_predictor(&theta[..p], true);
        let v = self.log_h(&self.data.y, &self.ln_fact, eta.as_slice(), nu)
            + self.prior.log_coef(&theta[..p])
            + self.prior.log_nu(nu);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    fn auxiliary_log_ratio<R: Rng + ?Sized>(&self, current: &[f64], proposed: &[f64], rng: &mut R) -> f64 {
        let p = self.data.n_coef();
        let eta_cur = self.data.linear_predictor(&current[..p], true);
        let eta_prop = self.data.linear_predictor(&proposed[..p], true);
        let (nu_cur, nu_prop) = (current[p], proposed[p]);
        let mut aux = Vec::with_capacity(self.data.len());
        for &e in eta_prop.iter() {
            let draw = CmpParams::new(e.exp(), nu_prop)
                .and_then(|params| cmp::sample(&params, &self.policy, rng));
            match draw {
                Ok(n) => aux.push(n),
                Err(err) => {
                    log::debug!("{}", ModelError::AuxiliarySamplingFailure(err));
                    return f64::NEG_INFINITY;
                }
            }
        }
        let ln_fact: Vec<f64> = aux.iter().map(|&n| ln_factorial(n)).collect();
        self.log_h(&aux, &ln_fact, eta_cur.as_slice(), nu_cur)
            - self.log_h(&aux, &ln_fact, eta_prop.as_slice(), nu_prop)
    }
}

/// Fits any component with the blocked MH engine; the chain's random stream
/// is seeded from `config.seed`.
pub fn fit_component(
    component: &Component,
    data: &RegressionData,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<FittedComponent, ModelError> {
    prior.validate()?;
    component.check_data(data)?;
    let init = component.init(data);
    let names = component.param_names(data);
    let blocks = component.blocks(data);
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let p = data.n_coef();
    let chain = match component {
        Component::OrdinaryCmp => {
            let target = ExchangeTarget {
                data,
                prior,
                policy: TruncationPolicy::default(),
                ln_fact: data.y.iter().map(|&n| ln_factorial(n)).collect(),
            };
            run_chain(&target, &init, &blocks, &names, config, &mut rng)?
        }
        _ => {
            let policy = TruncationPolicy::default();
            let target = FnTarget(|theta: &[f64]| {
                let lp = component.log_prior(prior, theta, p);
                if lp == f64::NEG_INFINITY {
                    return lp;
                }
                lp + component.loglik(data, theta, &policy)
            });
            run_chain(&target, &init, &blocks, &names, config, &mut rng)?
        }
    };
    Ok(FittedComponent {
        component: component.clone(),
        chain,
    })
}

/// Poisson regression with `log λ_i = x_i'β + offset_i`.
pub fn fit_ordinary_poisson(
    data: &RegressionData,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<FittedComponent, ModelError> {
    fit_component(&Component::OrdinaryPoisson, data, prior, config)
}

/// CMP regression over `(β, ν)` with the exchange algorithm: each proposal
/// draws auxiliary counts at the proposed parameters so no `Z(λ, ν)` is ever
/// evaluated. A failed auxiliary draw rejects the proposal.
pub fn fit_ordinary_cmp_exchange(
    data: &RegressionData,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<FittedComponent, ModelError> {
    fit_component(&Component::OrdinaryCmp, data, prior, config)
}

/// Binary regression of `I(y > 0)` on the design, without offset. For the
/// skewed-Weibull link the shape `α` is sampled too, starting at `link.alpha`.
pub fn fit_binary(
    data: &RegressionData,
    link: &LinkSpec,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<FittedComponent, ModelError> {
    let positives = data.y.iter().filter(|&&v| v > 0).count();
    if positives == 0 || positives == data.len() {
        return Err(ModelError::AllOnesOrAllZeros {
            positives,
            total: data.len(),
        });
    }
    let component = Component::Binary {
        link: *link,
        offset: false,
    };
    fit_component(&component, data, prior, config)
}

/// Zero-truncated Poisson or CMP regression on positive counts.
pub fn fit_zt_count(
    positives: &RegressionData,
    family: CountFamily,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<FittedComponent, ModelError> {
    if positives.is_empty() {
        return Err(ModelError::EmptyPositiveSet);
    }
    fit_component(&Component::ZeroTruncated { family }, positives, prior, config)
}
