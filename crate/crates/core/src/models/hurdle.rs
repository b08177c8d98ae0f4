use super::component::{fit_component, fit_zt_count, Component, CountFamily, FittedComponent};
use super::{ModelError, PriorSpec, RegressionData};
use crate::cmp::{self, CmpError, CmpParams, TruncationPolicy};
use crate::diagnostics::DicResult;
use crate::links::LinkSpec;
use crate::mcmc::ChainConfig;
use serde::{Deserialize, Serialize};

/// Both hurdle components and their deviance summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurdleFit {
    pub binary: FittedComponent,
    pub positive: FittedComponent,
    pub binary_dic: DicResult,
    pub positive_dic: DicResult,
    /// `binary_dic.dic + positive_dic.dic`.
    pub combined_dic: f64,
}

/// Seed of the positive component's chain given the hurdle's seed. The
/// binary component uses the hurdle seed itself.
pub fn positive_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

/// Fits the binary gate on all rows and the zero-truncated count model on
/// the positive rows, concurrently. The two posteriors are independent, so
/// each chain depends only on its own seed.
///
/// If the positive component fails, the error carries the binary fit. A
/// gate with no zeros or no positives is still fitted (its posterior is
/// held in place by the prior) so that it can be returned in that case.
pub fn fit_hurdle(
    data: &RegressionData,
    link: &LinkSpec,
    family: CountFamily,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<HurdleFit, ModelError> {
    let positives = data.positive_subset();
    if positives.is_empty() || positives.len() == data.len() {
        log::warn!(
            "hurdle gate sees {} positives out of {} rows",
            positives.len(),
            data.len()
        );
    }
    let gate = Component::Binary {
        link: *link,
        offset: false,
    };
    let pos_config = config.clone().with_seed(positive_seed(config.seed));
    let (binary, positive) = rayon::join(
        || fit_component(&gate, data, prior, config),
        || fit_zt_count(&positives, family, prior, &pos_config),
    );
    let binary = binary?;
    let positive = match positive {
        Ok(p) => p,
        Err(e) => {
            return Err(ModelError::PositiveComponent {
                binary: Box::new(binary),
                source: Box::new(e),
            })
        }
    };
    let binary_dic = binary.dic(data)?;
    let positive_dic = positive.dic(&positives)?;
    Ok(HurdleFit {
        combined_dic: binary_dic.dic + positive_dic.dic,
        binary,
        positive,
        binary_dic,
        positive_dic,
    })
}

/// Hurdle mass: `1 - p` at zero and `p · P_zt(n)` above.
pub fn hurdle_pmf(
    n: u64,
    p: f64,
    positive: &CmpParams,
    policy: &TruncationPolicy,
) -> Result<f64, CmpError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CmpError::DomainError);
    }
    match n {
        0 => Ok(1.0 - p),
        _ if p == 0.0 => Ok(0.0),
        _ => Ok(p * cmp::zt_pmf(n, positive, policy)?),
    }
}
