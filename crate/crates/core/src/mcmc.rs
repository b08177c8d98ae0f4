//! Seeded random-walk Metropolis-Hastings.
//!
//! Parameters are updated in blocks. Each block either takes a joint Gaussian
//! step or a multiplicative log-normal step (for strictly positive parameters,
//! with the matching Hastings correction). Per-block step multipliers are
//! tuned toward a target acceptance rate during burn-in only, so the kept part
//! of the chain is a fixed-kernel MH chain.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

/// Acceptance rate the burn-in adaptation steers toward.
pub const DEFAULT_TARGET_RATE: f64 = 0.30;
/// Iterations per adaptation batch.
pub const ADAPT_BATCH: usize = 50;

#[derive(Debug, Error)]
pub enum McmcError {
    #[error("log target is not finite at the initial point")]
    InvalidInit,
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("chain i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("chain csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("chain json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Per-parameter proposal standard deviations. Empty means 0.1 for every
    /// parameter.
    #[serde(default)]
    pub proposal_scales: Vec<f64>,
    #[serde(default = "default_true")]
    pub adapt: bool,
    #[serde(default = "default_target_rate")]
    pub target_rate: f64,
}

fn default_true() -> bool {
    true
}

fn default_target_rate() -> f64 {
    DEFAULT_TARGET_RATE
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iter: 50_000,
            burn_in: 10_000,
            thin: 4,
            seed: 1,
            proposal_scales: Vec::new(),
            adapt: true,
            target_rate: DEFAULT_TARGET_RATE,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), McmcError> {
        if self.burn_in >= self.n_iter {
            return Err(McmcError::InvalidConfig(format!(
                "burn_in {} must be below n_iter {}",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(McmcError::InvalidConfig("thin must be >= 1".into()));
        }
        if self.proposal_scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(McmcError::InvalidConfig("proposal scales must be positive".into()));
        }
        if !(self.target_rate > 0.0 && self.target_rate < 1.0) {
            return Err(McmcError::InvalidConfig("target_rate must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Number of rows a chain run with this configuration keeps.
    pub fn kept_draws(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn scales_for(&self, dim: usize) -> Result<Vec<f64>, McmcError> {
        match self.proposal_scales.len() {
            0 => Ok(vec![0.1; dim]),
            n if n == dim => Ok(self.proposal_scales.clone()),
            n => Err(McmcError::InvalidConfig(format!(
                "{n} proposal scales for {dim} parameters"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProposalKind {
    Gaussian,
    LogNormal,
    /// Log-normal walk without the Hastings correction. Only useful to show
    /// that the correction matters.
    #[doc(hidden)]
    LogNormalUncorrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub indices: Vec<usize>,
    pub kind: ProposalKind,
}

impl Block {
    pub fn gaussian(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            indices: indices.into_iter().collect(),
            kind: ProposalKind::Gaussian,
        }
    }

    pub fn log_normal(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            indices: indices.into_iter().collect(),
            kind: ProposalKind::LogNormal,
        }
    }
}

/// Something an MH kernel can target.
///
/// `log_density` is the part of the log posterior the kernel can evaluate.
/// Targets whose likelihood carries an intractable normalizer can supply the
/// missing piece of the acceptance ratio through `auxiliary_log_ratio`, which
/// is only called for proposals with a finite `log_density`.
pub trait Target {
    fn log_density(&self, theta: &[f64]) -> f64;

    fn auxiliary_log_ratio<R: Rng + ?Sized>(
        &self,
        _current: &[f64],
        _proposed: &[f64],
        _rng: &mut R,
    ) -> f64 {
        0.0
    }
}

/// Adapts a plain closure into a [`Target`].
pub struct FnTarget<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Target for FnTarget<F> {
    fn log_density(&self, theta: &[f64]) -> f64 {
        (self.0)(theta)
    }
}

/// Record of one burn-in adaptation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationStep {
    pub iteration: usize,
    pub block: usize,
    pub acceptance_rate: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub param_names: Vec<String>,
    /// Kept iterations, one row per draw.
    pub draws: Vec<Vec<f64>>,
    /// Accepted / proposed block moves after burn-in.
    pub acceptance_rate: f64,
    pub accepted: usize,
    pub proposed: usize,
    pub block_acceptance: Vec<f64>,
    /// Per-block step multipliers in force after burn-in.
    pub final_multipliers: Vec<f64>,
    #[serde(default)]
    pub adaptation: Vec<AdaptationStep>,
    pub config: ChainConfig,
}

impl PosteriorChain {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.param_index(name).map(|j| self.column(j))
    }

    /// Column means, accumulated as offsets from the first draw so that a
    /// constant column comes back exactly.
    pub fn posterior_mean(&self) -> Vec<f64> {
        let Some(first) = self.draws.first() else {
            return vec![f64::NAN; self.n_params()];
        };
        let n = self.draws.len() as f64;
        let mut shift = vec![0.0; self.n_params()];
        for row in &self.draws {
            for ((m, v), f) in shift.iter_mut().zip(row).zip(first) {
                *m += v - f;
            }
        }
        first.iter().zip(&shift).map(|(f, m)| f + m / n).collect()
    }

    /// Writes the draws as CSV with a header of parameter names.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), McmcError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.param_names)?;
        for row in &self.draws {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON sidecar: everything except the draws.
    pub fn sidecar(&self) -> ChainSidecar {
        ChainSidecar {
            param_names: self.param_names.clone(),
            n_draws: self.draws.len(),
            acceptance_rate: self.acceptance_rate,
            accepted: self.accepted,
            proposed: self.proposed,
            block_acceptance: self.block_acceptance.clone(),
            final_multipliers: self.final_multipliers.clone(),
            config: self.config.clone(),
        }
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), McmcError> {
        std::fs::create_dir_all(dir)?;
        let csv = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.write_csv(std::io::BufWriter::new(csv))?;
        let json = serde_json::to_string_pretty(&self.sidecar())?;
        std::fs::write(dir.join(format!("{stem}.json")), json)?;
        Ok(())
    }

    /// Reads a chain written by [`PosteriorChain::save`].
    pub fn load(dir: &Path, stem: &str) -> Result<Self, McmcError> {
        let sidecar: ChainSidecar =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let mut reader = csv::Reader::from_path(dir.join(format!("{stem}.csv")))?;
        let mut draws = Vec::with_capacity(sidecar.n_draws);
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|e| {
                        McmcError::InvalidConfig(format!("bad chain value {f:?}: {e}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            draws.push(row);
        }
        Ok(Self {
            param_names: sidecar.param_names,
            draws,
            acceptance_rate: sidecar.acceptance_rate,
            accepted: sidecar.accepted,
            proposed: sidecar.proposed,
            block_acceptance: sidecar.block_acceptance,
            final_multipliers: sidecar.final_multipliers,
            adaptation: Vec::new(),
            config: sidecar.config,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSidecar {
    pub param_names: Vec<String>,
    pub n_draws: usize,
    pub acceptance_rate: f64,
    pub accepted: usize,
    pub proposed: usize,
    pub block_acceptance: Vec<f64>,
    pub final_multipliers: Vec<f64>,
    pub config: ChainConfig,
}

/// Multiplicative Robbins-Monro step: scales grow when the observed
/// acceptance rate exceeds the target and shrink when it falls short.
pub fn adapt_scales(scales: &[f64], acceptance_rate: f64, target_rate: f64, step: f64) -> Vec<f64> {
    let factor = (step * (acceptance_rate - target_rate)).exp();
    scales.iter().map(|s| s * factor).collect()
}

/// Runs a blocked MH chain.
pub fn run_chain<T: Target, R: Rng + ?Sized>(
    target: &T,
    init: &[f64],
    blocks: &[Block],
    param_names: &[String],
    config: &ChainConfig,
    rng: &mut R,
) -> Result<PosteriorChain, McmcError> {
    config.validate()?;
    let dim = init.len();
    if param_names.len() != dim {
        return Err(McmcError::InvalidConfig(format!(
            "{} names for {dim} parameters",
            param_names.len()
        )));
    }
    for block in blocks {
        if block.indices.is_empty() || block.indices.iter().any(|&i| i >= dim) {
            return Err(McmcError::InvalidConfig("block index out of range".into()));
        }
        if block.kind != ProposalKind::Gaussian && block.indices.iter().any(|&i| init[i] <= 0.0) {
            return Err(McmcError::InvalidConfig(
                "log-normal block needs a positive starting value".into(),
            ));
        }
    }
    let scales = config.scales_for(dim)?;

    let mut theta = init.to_vec();
    let mut log_density = target.log_density(&theta);
    if !log_density.is_finite() {
        return Err(McmcError::InvalidInit);
    }

    let nb = blocks.len();
    let mut multipliers = vec![1.0; nb];
    let mut batch_accepts = vec![0usize; nb];
    let mut batch_index = 0usize;
    let mut accepted = vec![0usize; nb];
    let mut adaptation = Vec::new();
    let mut draws = Vec::with_capacity(config.kept_draws());
    let mut proposal = theta.clone();

    for iter in 0..config.n_iter {
        let burning = iter < config.burn_in;
        for (b, block) in blocks.iter().enumerate() {
            proposal.copy_from_slice(&theta);
            let mut log_correction = 0.0;
            for &i in &block.indices {
                let z: f64 = rng.sample(StandardNormal);
                let step = multipliers[b] * scales[i] * z;
                match block.kind {
                    ProposalKind::Gaussian => proposal[i] = theta[i] + step,
                    ProposalKind::LogNormal => {
                        proposal[i] = theta[i] * step.exp();
                        // q(θ|θ')/q(θ'|θ) = θ'/θ for a log-normal walk
                        log_correction += step;
                    }
                    ProposalKind::LogNormalUncorrected => proposal[i] = theta[i] * step.exp(),
                }
            }
            let proposed_density = target.log_density(&proposal);
            let mut accept = false;
            if proposed_density.is_finite() {
                let aux = target.auxiliary_log_ratio(&theta, &proposal, rng);
                let log_ratio = proposed_density - log_density + aux + log_correction;
                let u: f64 = rng.random();
                accept = !log_ratio.is_nan() && u.ln() < log_ratio;
            }
            if accept {
                theta.copy_from_slice(&proposal);
                log_density = proposed_density;
                if burning {
                    batch_accepts[b] += 1;
                } else {
                    accepted[b] += 1;
                }
            }
        }

        if burning && config.adapt && (iter + 1) % ADAPT_BATCH == 0 {
            batch_index += 1;
            let step = 1.0 / (batch_index as f64).sqrt();
            for b in 0..nb {
                let rate = batch_accepts[b] as f64 / ADAPT_BATCH as f64;
                multipliers[b] = adapt_scales(&[multipliers[b]], rate, config.target_rate, step)[0];
                adaptation.push(AdaptationStep {
                    iteration: iter,
                    block: b,
                    acceptance_rate: rate,
                    multiplier: multipliers[b],
                });
                batch_accepts[b] = 0;
            }
        }

        if !burning && (iter - config.burn_in + 1).is_multiple_of(config.thin) {
            draws.push(theta.clone());
        }
    }

    let post = config.n_iter - config.burn_in;
    let total_accepted: usize = accepted.iter().sum();
    let total_proposed = post * nb;
    Ok(PosteriorChain {
        param_names: param_names.to_vec(),
        draws,
        acceptance_rate: if total_proposed == 0 {
            0.0
        } else {
            total_accepted as f64 / total_proposed as f64
        },
        accepted: total_accepted,
        proposed: total_proposed,
        block_acceptance: accepted.iter().map(|&a| a as f64 / post as f64).collect(),
        final_multipliers: multipliers,
        adaptation,
        config: config.clone(),
    })
}

fn default_names(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("theta{i}")).collect()
}

/// Gaussian random walk over all coordinates jointly, one scale per coordinate.
pub fn run_mh<F, R>(
    log_target: F,
    init: &[f64],
    config: &ChainConfig,
    rng: &mut R,
) -> Result<PosteriorChain, McmcError>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let blocks = [Block::gaussian(0..init.len())];
    run_chain(&FnTarget(log_target), init, &blocks, &default_names(init.len()), config, rng)
}

/// Like [`run_mh`], but the coordinates in `positive` move by a log-normal
/// walk (separately from the Gaussian block) with the Hastings correction.
pub fn run_mh_positive<F, R>(
    log_target: F,
    init: &[f64],
    positive: &[usize],
    config: &ChainConfig,
    rng: &mut R,
) -> Result<PosteriorChain, McmcError>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let free: Vec<usize> = (0..init.len()).filter(|i| !positive.contains(i)).collect();
    let mut blocks = Vec::new();
    if !free.is_empty() {
        blocks.push(Block::gaussian(free));
    }
    if !positive.is_empty() {
        blocks.push(Block::log_normal(positive.iter().copied()));
    }
    run_chain(&FnTarget(log_target), init, &blocks, &default_names(init.len()), config, rng)
}
