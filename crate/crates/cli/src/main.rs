use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cmphurdle::pipeline::{
    ingest, load_config, prepare, run_experiment, run_fit, run_ppca, run_report, run_validate, simulate,
    write_simulation_csv, DataSource, ExperimentConfig, ModelReport, ModelStatus, PipelineError, SimKind, SimSpec,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cmphurdle", version, about = "Bayesian hurdle and CMP count regression")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the MCMC seed (and the simulation seed for `simulate`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the input CSV against the schema and print an encoding summary.
    IngestCheck,
    /// Fit PPCA to the composition block and write scores and BIC curve.
    Ppca,
    /// Generate a simulation-study dataset as CSV.
    Simulate {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 1_000)]
        m: usize,
    },
    /// Fit the model roster on the training split.
    Fit,
    /// Posterior predictive validation of fitted models on the test split.
    Validate,
    /// Write the comparison and reconstruction tables and the run manifest.
    Report,
    /// All stages in order.
    Run,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Which {
    Sim1,
    Sim2,
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| PipelineError::Config("--config is required for this command".into()))?;
    let mut config = load_config(path)?;
    if let Some(seed) = cli.seed {
        config.mcmc.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn failures(reports: &[ModelReport]) -> Result<()> {
    let failed: Vec<(String, String)> = reports
        .iter()
        .filter_map(|r| match &r.status {
            ModelStatus::Failed(e) => Some((r.model.as_str().to_string(), e.clone())),
            ModelStatus::Ok => None,
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::FitFailure(failed).into())
    }
}

fn print_table(reports: &[ModelReport]) {
    println!("{:<15} {:>12} {:>10} {:>10} {:>10} {:>8}", "model", "dic", "p_d", "mse", "mae", "ks");
    let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    for r in reports {
        let v = r.validation;
        println!(
            "{:<15} {:>12} {:>10} {:>10} {:>10} {:>8}",
            r.model.as_str(),
            f(r.dic),
            f(r.p_d),
            f(v.map(|m| m.mse)),
            f(v.map(|m| m.mae)),
            f(v.map(|m| m.ks))
        );
    }
}

fn ingest_check(config: &ExperimentConfig) -> Result<()> {
    let summary = match &config.data {
        DataSource::Csv { path, schema } => {
            let d = ingest(path, schema)?;
            serde_json::json!({
                "rows": d.len(),
                "positives": d.y.iter().filter(|&&v| v > 0).count(),
                "covariates": d.covariate_names,
                "offset": d.offset.is_some(),
                "composition_columns": d.composition_names,
                "warnings": d.warnings,
            })
        }
        DataSource::Simulate(spec) => {
            let s = simulate(spec)?;
            serde_json::json!({
                "rows": s.data.len(),
                "positives": s.data.y.iter().filter(|&&v| v > 0).count(),
                "covariates": s.data.names,
                "simulated": spec,
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn write_simulation(which: Which, m: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let spec = SimSpec {
        which: match which {
            Which::Sim1 => SimKind::Sim1,
            Which::Sim2 => SimKind::Sim2,
        },
        m,
        seed,
    };
    let sim = simulate(&spec)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let stem = format!("{:?}", spec.which).to_lowercase();
            let file = fs::File::create(dir.join(format!("{stem}.csv")))?;
            write_simulation_csv(&sim, file)?;
            fs::write(
                dir.join(format!("{stem}_truth.json")),
                serde_json::to_string_pretty(&sim.truth)? + "\n",
            )?;
        }
        None => write_simulation_csv(&sim, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Simulate { which, m } = cli.command {
        return write_simulation(which, m, cli.seed.unwrap_or(0), cli.out.as_deref());
    }
    let config = config(cli)?;
    let out = config.output_dir.clone();
    match cli.command {
        Command::IngestCheck => ingest_check(&config),
        Command::Ppca => {
            let prepared = prepare(&config)?;
            run_ppca(&prepared, &out)?;
            let p = prepared.ppca.as_ref().expect("ppca enabled");
            println!("ppca: k = {}, loglik = {:.4}", p.model.k(), p.report.loglik);
            Ok(())
        }
        Command::Fit => {
            let prepared = prepare(&config)?;
            if prepared.ppca.is_some() {
                run_ppca(&prepared, &out)?;
            }
            let reports = run_fit(&prepared, &out)?;
            print_table(&reports);
            failures(&reports)
        }
        Command::Validate => {
            let reports = run_validate(&prepare(&config)?, &out)?;
            print_table(&reports);
            failures(&reports)
        }
        Command::Report => {
            let reports = run_report(&prepare(&config)?, &out)?;
            print_table(&reports);
            failures(&reports)
        }
        Command::Run => {
            let summary = run_experiment(&config, &out)?;
            print_table(&summary.reports);
            if !summary.leaks.is_empty() {
                log::error!("row audit flagged stages: {:?}", summary.leaks);
            }
            summary.into_result().map(|_| ()).map_err(Into::into)
        }
        Command::Simulate { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
