use super::PipelineError;
use crate::cmp::{self, CmpParams, TruncationPolicy};
use crate::links::{LinkFamily, LinkSpec};
use crate::models::RegressionData;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimKind {
    /// Probit gate times Poisson counts.
    Sim1,
    /// Skewed-Weibull gate times CMP counts.
    Sim2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub which: SimKind,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_m() -> usize {
    1_000
}

/// Generating parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub link: LinkFamily,
    pub beta: Vec<f64>,
    pub alpha: Option<f64>,
    pub gamma: Vec<f64>,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    /// Design `(1, x)`, no offset.
    pub data: RegressionData,
    pub truth: SimTruth,
}

impl SimSpec {
    pub fn truth(&self) -> SimTruth {
        match self.which {
            SimKind::Sim1 => SimTruth {
                link: LinkFamily::Probit,
                beta: vec![-1.0, -0.5],
                alpha: None,
                gamma: vec![1.0, 0.3],
                nu: 1.0,
            },
            SimKind::Sim2 => SimTruth {
                link: LinkFamily::SkewedWeibull,
                beta: vec![-2.0, 1.0],
                alpha: Some(3.0),
                gamma: vec![1.0, 0.3],
                nu: 0.63,
            },
        }
    }
}

/// `x ~ N(0, 1)`; a Bernoulli gate and an untruncated count are drawn
/// independently for every row and multiplied.
pub fn simulate(spec: &SimSpec) -> Result<SimulatedData, PipelineError> {
    if spec.m < 10 {
        return Err(PipelineError::Config(format!("simulation needs m >= 10, got {}", spec.m)));
    }
    let truth = spec.truth();
    let link = match truth.alpha {
        Some(a) => LinkSpec::skewed_weibull(a),
        None => LinkSpec::probit(),
    };
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let x: Vec<f64> = (0..spec.m).map(|_| rng.sample(StandardNormal)).collect();
    let gate: Vec<bool> = x
        .iter()
        .map(|&xi| rng.random::<f64>() < link.prob_event(truth.beta[0] + truth.beta[1] * xi))
        .collect();
    let policy = TruncationPolicy::default();
    let mut y = Vec::with_capacity(spec.m);
    for (&xi, &g) in x.iter().zip(&gate) {
        let lambda = (truth.gamma[0] + truth.gamma[1] * xi).exp();
        let params = CmpParams::new(lambda, truth.nu).map_err(|e| PipelineError::Config(e.to_string()))?;
        let n = cmp::sample(&params, &policy, &mut rng).map_err(|e| PipelineError::Config(e.to_string()))?;
        y.push(if g { n } else { 0 });
    }
    let covariates = DMatrix::from_column_slice(spec.m, 1, &x);
    let data = RegressionData::with_intercept(y, &covariates, &["x1".to_string()], None)?;
    Ok(SimulatedData { data, truth })
}

/// Writes `y,x1` rows.
pub fn write_simulation_csv<W: Write>(sim: &SimulatedData, writer: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["y", "x1"])?;
    for i in 0..sim.data.len() {
        w.write_record([sim.data.y[i].to_string(), format!("{:?}", sim.data.x[(i, 1)])])?;
    }
    w.flush()?;
    Ok(())
}
