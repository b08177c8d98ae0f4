use super::audit::{AuditRecord, RowAudit};
use super::config::{DataSource, ExperimentConfig, KChoice, ModelName, PpcaFitRows};
use super::ingest::{ingest, IngestWarning};
use super::simulate::{simulate, SimTruth};
use super::split::split_indices;
use super::PipelineError;
use crate::diagnostics::{
    hpd_interval, posterior_predictive, summarize_chain, validation_metrics, DicResult,
    ParameterSummary, PredictiveModel, ValidationMetrics,
};
use crate::links::{probit_equivalent_scale, LinkSpec};
use crate::mcmc::PosteriorChain;
use crate::models::{
    fit_component, Component, CountFamily, FittedComponent, HurdleFit, ModelError, RegressionData,
};
use crate::ppca::{
    self, reconstruct_coefficients, select_k, EmOptions, PpcaFitReport, PpcaModel, PpcaModelFile,
    PpcaPrior,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Fitted PPCA used to build score covariates.
#[derive(Debug, Clone)]
pub struct PpcaOutcome {
    pub model: PpcaModel,
    pub report: PpcaFitReport,
    pub bic_curve: Vec<(usize, Option<f64>)>,
    pub composition_names: Vec<String>,
    /// Source rows the model was fitted on.
    pub fit_rows: Vec<usize>,
}

/// Data, split and PPCA scores, derived deterministically from the config.
#[derive(Debug)]
pub struct Prepared {
    pub config: ExperimentConfig,
    /// All rows, intercept column first.
    pub full: RegressionData,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub ppca: Option<PpcaOutcome>,
    pub warnings: Vec<IngestWarning>,
    pub truth: Option<SimTruth>,
    pub audit: RowAudit,
}

fn select(data: &RegressionData, rows: &[usize]) -> RegressionData {
    RegressionData {
        y: rows.iter().map(|&i| data.y[i]).collect(),
        x: data.x.select_rows(rows),
        offset: rows.iter().map(|&i| data.offset[i]).collect(),
        names: data.names.clone(),
    }
}

impl Prepared {
    /// Training rows, recorded under `stage` in the audit.
    pub fn train(&self, stage: &str) -> RegressionData {
        self.audit.record(stage, &self.train_idx);
        select(&self.full, &self.train_idx)
    }

    /// Test rows, recorded under `stage` in the audit.
    pub fn test(&self, stage: &str) -> RegressionData {
        self.audit.record(stage, &self.test_idx);
        select(&self.full, &self.test_idx)
    }
}

/// Loads or simulates the data, splits it and fits PPCA if enabled.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, PipelineError> {
    config.validate()?;
    let (y, mut covariates, mut names, offset, composition, composition_names, warnings, truth) =
        match &config.data {
            DataSource::Csv { path, schema } => {
                let d = ingest(path, schema)?;
                (d.y, d.covariates, d.covariate_names, d.offset, d.composition, d.composition_names, d.warnings, None)
            }
            DataSource::Simulate(spec) => {
                let sim = simulate(spec)?;
                let x = sim.data.x.columns(1, sim.data.n_coef() - 1).into_owned();
                let names = sim.data.names[1..].to_vec();
                (sim.data.y, x, names, None, None, Vec::new(), Vec::new(), Some(sim.truth))
            }
        };
    let m = y.len();
    let (train_idx, test_idx) = split_indices(m, config.split.fraction, config.split.seed)?;
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(PipelineError::Config(format!("split of {m} rows leaves an empty side")));
    }
    let audit = RowAudit::new();

    let mut ppca_outcome = None;
    if config.ppca.enabled {
        let comp = composition.ok_or_else(|| {
            PipelineError::Config("ppca is enabled but the schema declares no composition columns".into())
        })?;
        let fit_rows = match config.ppca.fit_on {
            PpcaFitRows::Train => train_idx.clone(),
            PpcaFitRows::All => (0..m).collect(),
        };
        audit.record("ppca_fit", &fit_rows);
        let all = comp.proportions();
        let x = all.select_rows(&fit_rows);
        let d = x.ncols();
        let opts = EmOptions {
            seed: config.ppca.seed,
            ..EmOptions::default()
        };
        let prior = PpcaPrior::default();
        let k_max = config.ppca.k_max.unwrap_or(d.saturating_sub(1)).min(d.saturating_sub(1));
        let (k, bic_curve) = match config.ppca.k {
            KChoice::Fixed(k) => (k, Vec::new()),
            KChoice::Auto => {
                let curve = ppca::bic_curve(&x, k_max, &prior, &opts);
                (select_k(&x, k_max, &prior, &opts)?, curve)
            }
        };
        let (model, report) = match ppca::em_fit(&x, k, &opts) {
            Ok(fit) => fit,
            Err(ppca::PpcaError::ConvergenceFailure(best)) => {
                log::warn!("PPCA did not converge for k = {k}; using best-so-far");
                *best
            }
            Err(ppca::PpcaError::SingularCovariance) => {
                // Closed compositions leave no residual variance at k = d - 1.
                log::warn!("ML PPCA is singular for k = {k}; using the MAP fit");
                match ppca::map_fit(&x, k, &prior, &opts) {
                    Ok(fit) => fit,
                    Err(ppca::PpcaError::ConvergenceFailure(best)) => *best,
                    Err(e) => return Err(e.into()),
                }
            }
            Err(e) => return Err(e.into()),
        };
        let scores = ppca::transform(&all, &model)?;
        let p = covariates.ncols();
        covariates = covariates.resize_horizontally(p + k, 0.0);
        for j in 0..k {
            covariates.set_column(p + j, &scores.column(j));
            names.push(format!("PC{}", j + 1));
        }
        ppca_outcome = Some(PpcaOutcome {
            model,
            report,
            bic_curve,
            composition_names,
            fit_rows,
        });
    }

    let full = RegressionData::with_intercept(y, &covariates, &names, offset)?;
    Ok(Prepared {
        config: config.clone(),
        full,
        train_idx,
        test_idx,
        ppca: ppca_outcome,
        warnings,
        truth,
        audit,
    })
}

/// Writes the PPCA model, BIC curve and score matrix under `<out>/ppca/`.
pub fn run_ppca(prepared: &Prepared, out: &Path) -> Result<(), PipelineError> {
    let outcome = prepared
        .ppca
        .as_ref()
        .ok_or_else(|| PipelineError::Config("ppca is not enabled".into()))?;
    let dir = out.join("ppca");
    fs::create_dir_all(&dir)?;
    let file = PpcaModelFile::from_model(&outcome.model, prepared.config.ppca.seed, outcome.report.loglik);
    fs::write(dir.join("model.json"), serde_json::to_string_pretty(&file)? + "\n")?;
    let mut w = csv::Writer::from_path(dir.join("bic.csv"))?;
    w.write_record(["k", "bic"])?;
    for (k, b) in &outcome.bic_curve {
        w.write_record([k.to_string(), b.map(|v| format!("{v:?}")).unwrap_or_default()])?;
    }
    w.flush()?;
    let k = outcome.model.k();
    let p = prepared.full.n_coef();
    let mut w = csv::Writer::from_path(dir.join("scores.csv"))?;
    w.write_record((1..=k).map(|j| format!("PC{j}")))?;
    for i in 0..prepared.full.len() {
        w.write_record((p - k..p).map(|j| format!("{:?}", prepared.full.x[(i, j)])))?;
    }
    w.flush()?;
    persist_audit(prepared, out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ComponentKey {
    Poisson,
    Cmp,
    Probit,
    Weibull,
    Ztp,
    Ztcmp,
}

impl ComponentKey {
    fn ordinal(self) -> u64 {
        self as u64
    }

    fn name(self) -> &'static str {
        match self {
            ComponentKey::Poisson => "poisson",
            ComponentKey::Cmp => "cmp",
            ComponentKey::Probit => "probit",
            ComponentKey::Weibull => "skewed_weibull",
            ComponentKey::Ztp => "ztp",
            ComponentKey::Ztcmp => "ztcmp",
        }
    }

    fn positive_only(self) -> bool {
        matches!(self, ComponentKey::Ztp | ComponentKey::Ztcmp)
    }

    fn component(self, config: &ExperimentConfig) -> Component {
        let link = |l: LinkSpec| Component::Binary {
            link: l
                .with_convention(config.link.weibull_convention)
                .with_clamp(config.link.clamp),
            offset: config.link.binary_offset,
        };
        match self {
            ComponentKey::Poisson => Component::OrdinaryPoisson,
            ComponentKey::Cmp => Component::OrdinaryCmp,
            ComponentKey::Probit => link(LinkSpec::probit()),
            ComponentKey::Weibull => link(LinkSpec::skewed_weibull(1.0)),
            ComponentKey::Ztp => Component::ZeroTruncated {
                family: CountFamily::Poisson,
            },
            ComponentKey::Ztcmp => Component::ZeroTruncated {
                family: CountFamily::Cmp,
            },
        }
    }
}

/// `(role, component)` pairs of a roster model.
fn model_parts(model: ModelName) -> Vec<(&'static str, ComponentKey)> {
    match model {
        ModelName::Poisson => vec![("ordinary", ComponentKey::Poisson)],
        ModelName::Cmp => vec![("ordinary", ComponentKey::Cmp)],
        ModelName::ProbitZtp => vec![("binary", ComponentKey::Probit), ("positive", ComponentKey::Ztp)],
        ModelName::WeibullZtp => vec![("binary", ComponentKey::Weibull), ("positive", ComponentKey::Ztp)],
        ModelName::ProbitZtcmp => vec![("binary", ComponentKey::Probit), ("positive", ComponentKey::Ztcmp)],
        ModelName::WeibullZtcmp => vec![("binary", ComponentKey::Weibull), ("positive", ComponentKey::Ztcmp)],
    }
}

fn chain_stem(role: &str) -> String {
    match role {
        "ordinary" => "chain".to_string(),
        r => format!("chain_{r}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub role: String,
    pub component: Component,
    pub seed: u64,
    pub n_obs: usize,
    pub dic: DicResult,
    pub acceptance_rate: f64,
    pub parameters: Vec<ParameterSummary>,
    /// Probit coefficients multiplied by the Weibull-equivalent scale at the
    /// skewed-Weibull fit's posterior mean `α` (when both gates were fitted).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescaled: Option<Vec<ParameterSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelStatus {
    Ok,
    Failed(String),
}

/// Contents of `<out>/<model>/summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelName,
    pub status: ModelStatus,
    pub dic: Option<f64>,
    pub p_d: Option<f64>,
    pub components: Vec<ComponentReport>,
    pub validation: Option<ValidationMetrics>,
}

impl ModelReport {
    fn write(&self, out: &Path) -> Result<(), PipelineError> {
        let dir = out.join(self.model.as_str());
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    fn read(out: &Path, model: ModelName) -> Result<Self, PipelineError> {
        let path = out.join(model.as_str()).join("summary.json");
        let text = fs::read_to_string(&path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

struct ComponentFit {
    fitted: FittedComponent,
    dic: DicResult,
    n_obs: usize,
    seed: u64,
}

fn fit_one(prepared: &Prepared, key: ComponentKey) -> Result<ComponentFit, String> {
    let config = &prepared.config;
    let stage = format!("fit:{}", key.name());
    let train = prepared.train(&stage);
    let data = if key.positive_only() {
        let pos = train.positive_subset();
        if pos.is_empty() {
            return Err(ModelError::EmptyPositiveSet.to_string());
        }
        pos
    } else {
        train
    };
    let seed = config.mcmc.seed.wrapping_add(key.ordinal());
    let chain_config = config.mcmc.clone().with_seed(seed);
    let component = key.component(config);
    let fitted = fit_component(&component, &data, &config.prior, &chain_config).map_err(|e| e.to_string())?;
    let dic = fitted.dic(&data).map_err(|e| e.to_string())?;
    Ok(ComponentFit {
        fitted,
        dic,
        n_obs: data.len(),
        seed,
    })
}

fn rescale_summaries(chain: &PosteriorChain, n_coef: usize, scale: f64) -> Vec<ParameterSummary> {
    (0..n_coef)
        .filter_map(|j| {
            let col: Vec<f64> = chain.column(j).iter().map(|v| v * scale).collect();
            let hpd = hpd_interval(&col, 0.95).ok()?;
            Some(ParameterSummary {
                name: format!("{}_scaled", chain.param_names[j]),
                mean: col.iter().sum::<f64>() / col.len() as f64,
                hpd_low: hpd.lower,
                hpd_high: hpd.upper,
                hw_stationary: None,
                mcse: crate::diagnostics::mcse(&col),
            })
        })
        .collect()
}

/// Fits every component the roster needs (each once, concurrently), writes
/// chains and per-model summaries, and returns the reports in roster order.
pub fn run_fit(prepared: &Prepared, out: &Path) -> Result<Vec<ModelReport>, PipelineError> {
    let config = &prepared.config;
    let mut keys: Vec<ComponentKey> = config
        .models
        .iter()
        .flat_map(|&m| model_parts(m).into_iter().map(|(_, k)| k))
        .collect();
    keys.sort();
    keys.dedup();
    let fits: BTreeMap<ComponentKey, Result<ComponentFit, String>> = keys
        .par_iter()
        .map(|&k| (k, fit_one(prepared, k)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let weibull_alpha = match fits.get(&ComponentKey::Weibull) {
        Some(Ok(f)) => f.fitted.chain.column_by_name("alpha").map(|a| a.iter().sum::<f64>() / a.len() as f64),
        _ => None,
    };

    let mut reports = Vec::new();
    for &model in &config.models {
        let dir = out.join(model.as_str());
        fs::create_dir_all(&dir)?;
        let mut components = Vec::new();
        let mut failure = None;
        for (role, key) in model_parts(model) {
            match &fits[&key] {
                Ok(fit) => {
                    fit.fitted.chain.save(&dir, &chain_stem(role))?;
                    let rescaled = match (key, weibull_alpha) {
                        (ComponentKey::Probit, Some(alpha)) => Some(rescale_summaries(
                            &fit.fitted.chain,
                            prepared.full.n_coef(),
                            probit_equivalent_scale(alpha),
                        )),
                        _ => None,
                    };
                    components.push(ComponentReport {
                        role: role.to_string(),
                        component: fit.fitted.component.clone(),
                        seed: fit.seed,
                        n_obs: fit.n_obs,
                        dic: fit.dic,
                        acceptance_rate: fit.fitted.chain.acceptance_rate,
                        parameters: summarize_chain(&fit.fitted.chain)?,
                        rescaled,
                    });
                }
                Err(e) => {
                    failure.get_or_insert_with(|| format!("{}: {e}", key.name()));
                }
            }
        }
        let report = match failure {
            Some(msg) => ModelReport {
                model,
                status: ModelStatus::Failed(msg),
                dic: None,
                p_d: None,
                components,
                validation: None,
            },
            None => ModelReport {
                model,
                status: ModelStatus::Ok,
                dic: Some(components.iter().map(|c| c.dic.dic).sum()),
                p_d: Some(components.iter().map(|c| c.dic.p_d).sum()),
                components,
                validation: None,
            },
        };
        report.write(out)?;
        reports.push(report);
    }
    persist_audit(prepared, out)?;
    Ok(reports)
}

fn load_component(out: &Path, model: ModelName, part: &ComponentReport) -> Result<FittedComponent, PipelineError> {
    let chain = PosteriorChain::load(&out.join(model.as_str()), &chain_stem(&part.role))?;
    Ok(FittedComponent {
        component: part.component.clone(),
        chain,
    })
}

/// Posterior predictive checks on the test split for every successfully
/// fitted model; updates each `summary.json` with its validation metrics.
pub fn run_validate(prepared: &Prepared, out: &Path) -> Result<Vec<ModelReport>, PipelineError> {
    let config = &prepared.config;
    let mut reports = Vec::new();
    for &model in &config.models {
        let mut report = ModelReport::read(out, model)?;
        if report.status == ModelStatus::Ok {
            let test = prepared.test(&format!("validate:{}", model.as_str()));
            let fitted: Vec<FittedComponent> = report
                .components
                .iter()
                .map(|c| load_component(out, model, c))
                .collect::<Result<_, _>>()?;
            let seed = config.mcmc.seed.wrapping_add(1_000 + model as u64);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let hurdle;
            let predictive_model = if model.is_hurdle() {
                hurdle = HurdleFit {
                    binary: fitted[0].clone(),
                    positive: fitted[1].clone(),
                    binary_dic: report.components[0].dic,
                    positive_dic: report.components[1].dic,
                    combined_dic: report.dic.unwrap_or(f64::NAN),
                };
                PredictiveModel::Hurdle(&hurdle)
            } else {
                PredictiveModel::Ordinary(&fitted[0])
            };
            let outcome = posterior_predictive(predictive_model, &test, config.predictive_replicates, &mut rng)
                .and_then(|sample| validation_metrics(&test.y, &sample.mean(), &sample.draws));
            match outcome {
                Ok(metrics) => report.validation = Some(metrics),
                Err(e) => report.status = ModelStatus::Failed(format!("validation: {e}")),
            }
            report.write(out)?;
        }
        reports.push(report);
    }
    persist_audit(prepared, out)?;
    Ok(reports)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Writes `comparison.csv`, `pca_reconstruction.csv` and `run_manifest.json`
/// from the per-model summaries on disk.
pub fn run_report(prepared: &Prepared, out: &Path) -> Result<Vec<ModelReport>, PipelineError> {
    let config = &prepared.config;
    let reports: Vec<ModelReport> = config
        .models
        .iter()
        .map(|&m| ModelReport::read(out, m))
        .collect::<Result<_, _>>()?;

    let mut w = csv::Writer::from_path(out.join("comparison.csv"))?;
    w.write_record(["model", "status", "dic", "p_d", "mse", "mae", "ks"])?;
    for r in &reports {
        let status = match &r.status {
            ModelStatus::Ok => "ok".to_string(),
            ModelStatus::Failed(e) => format!("failed: {e}"),
        };
        let v = r.validation;
        w.write_record([
            r.model.as_str().to_string(),
            status,
            fmt_opt(r.dic),
            fmt_opt(r.p_d),
            fmt_opt(v.map(|m| m.mse)),
            fmt_opt(v.map(|m| m.mae)),
            fmt_opt(v.map(|m| m.ks)),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join("pca_reconstruction.csv"))?;
    w.write_record(["model", "role", "composition", "estimate", "hpd_low", "hpd_high"])?;
    if let Some(ppca) = &prepared.ppca {
        for r in reports.iter().filter(|r| r.status == ModelStatus::Ok) {
            for part in &r.components {
                let fitted = load_component(out, r.model, part)?;
                for row in reconstruct_rows(&fitted.chain, ppca, config.ppca.mean_term)? {
                    w.write_record([
                        r.model.as_str().to_string(),
                        part.role.clone(),
                        row.0,
                        format!("{:?}", row.1),
                        format!("{:?}", row.2),
                        format!("{:?}", row.3),
                    ])?;
                }
            }
        }
    }
    w.flush()?;

    write_manifest(prepared, out, &reports)?;
    persist_audit(prepared, out)?;
    Ok(reports)
}

/// Per composition column: mean and 95% HPD of `B · coef + mean term` over draws.
fn reconstruct_rows(
    chain: &PosteriorChain,
    ppca: &PpcaOutcome,
    mean_term: ppca::MeanTerm,
) -> Result<Vec<(String, f64, f64, f64)>, PipelineError> {
    let k = ppca.model.k();
    let cols: Vec<usize> = (1..=k)
        .filter_map(|j| chain.param_names.iter().position(|n| n.ends_with(&format!("_PC{j}"))))
        .collect();
    if cols.len() != k {
        return Ok(Vec::new());
    }
    let d = ppca.model.d();
    let mut per_draw = DMatrix::<f64>::zeros(chain.n_draws(), d);
    for (s, row) in chain.draws.iter().enumerate() {
        let coef: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
        let v = reconstruct_coefficients(&coef, &ppca.model, mean_term)?;
        per_draw.set_row(s, &v.transpose());
    }
    let mut rows = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = per_draw.column(j).iter().copied().collect();
        let hpd = hpd_interval(&col, 0.95)?;
        let name = ppca.composition_names.get(j).cloned().unwrap_or_else(|| format!("comp{j}"));
        rows.push((name, col.iter().sum::<f64>() / col.len() as f64, hpd.lower, hpd.upper));
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    crate_version: &'static str,
    timestamp_unix: u64,
    seeds: BTreeMap<&'static str, u64>,
    n_rows: usize,
    n_train: usize,
    n_test: usize,
    ppca_k: Option<usize>,
    ingest_warnings: &'a [IngestWarning],
    truth: &'a Option<SimTruth>,
    models: Vec<(&'static str, &'a ModelStatus)>,
    config: &'a ExperimentConfig,
}

fn write_manifest(prepared: &Prepared, out: &Path, reports: &[ModelReport]) -> Result<(), PipelineError> {
    let config = &prepared.config;
    let mut seeds = BTreeMap::new();
    seeds.insert("mcmc", config.mcmc.seed);
    seeds.insert("split", config.split.seed);
    seeds.insert("ppca", config.ppca.seed);
    if let DataSource::Simulate(spec) = &config.data {
        seeds.insert("simulate", spec.seed);
    }
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        seeds,
        n_rows: prepared.full.len(),
        n_train: prepared.train_idx.len(),
        n_test: prepared.test_idx.len(),
        ppca_k: prepared.ppca.as_ref().map(|p| p.model.k()),
        ingest_warnings: &prepared.warnings,
        truth: &prepared.truth,
        models: reports.iter().map(|r| (r.model.as_str(), &r.status)).collect(),
        config,
    };
    fs::write(out.join("run_manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Merges this process's audit into `<out>/row_audit.json`.
fn persist_audit(prepared: &Prepared, out: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(out)?;
    let path = out.join("row_audit.json");
    let mut record = prepared.audit.to_record(&prepared.train_idx, &prepared.test_idx);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(old) = serde_json::from_str::<AuditRecord>(&text) {
            if old.train == record.train && old.test == record.test {
                for (stage, rows) in old.stages {
                    let entry = record.stages.entry(stage).or_default();
                    entry.extend(rows);
                    entry.sort_unstable();
                    entry.dedup();
                }
            }
        }
    }
    fs::write(path, serde_json::to_string_pretty(&record)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<ModelReport>,
    /// Stages that read rows from the wrong side of the split.
    pub leaks: Vec<String>,
}

impl RunSummary {
    pub fn failures(&self) -> Vec<(String, String)> {
        self.reports
            .iter()
            .filter_map(|r| match &r.status {
                ModelStatus::Failed(e) => Some((r.model.as_str().to_string(), e.clone())),
                ModelStatus::Ok => None,
            })
            .collect()
    }

    /// `Err(FitFailure)` when any model failed.
    pub fn into_result(self) -> Result<Self, PipelineError> {
        let failures = self.failures();
        if failures.is_empty() {
            Ok(self)
        } else {
            Err(PipelineError::FitFailure(failures))
        }
    }
}

/// prepare → (ppca) → fit → validate → report, all under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<RunSummary, PipelineError> {
    let prepared = prepare(config)?;
    fs::create_dir_all(out)?;
    // Stage audits from a previous run in the same directory do not apply.
    let _ = fs::remove_file(out.join("row_audit.json"));
    if prepared.ppca.is_some() {
        run_ppca(&prepared, out)?;
    }
    run_fit(&prepared, out)?;
    run_validate(&prepared, out)?;
    let reports = run_report(&prepared, out)?;
    Ok(RunSummary {
        leaks: prepared.audit.leaks(&prepared.train_idx, &prepared.test_idx),
        reports,
    })
}
