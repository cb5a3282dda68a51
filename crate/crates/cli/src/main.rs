//! Batch experiment driver: configures parameters, runs suites, and emits
//! machine-readable reports.
//!
//! Exit codes: 0 when no check reports a violation (inconclusive checks
//! warn), 1 when any check is violated, 2 on configuration errors.

mod config;
mod report;
mod suites;

use clap::{Parser, Subcommand};
use config::{OutputFormat, RunConfig};
use report::{run_jobs, Job, ReportBundle};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fraclab", version, about = "Weighted fractional seminorm laboratory")]
struct Cli {
    /// key=value configuration file (lowest-precedence overrides)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Spatial dimension N
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Fractional order s in (1, 2)
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Integrability exponent p in (1, N/s)
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Weight exponent a in [0, (N - s p)/2)
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples for R^N integrals
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Monte Carlo samples for the double-integral seminorms
    #[arg(long, global = true)]
    samples_gagliardo: Option<u64>,
    #[arg(long, global = true)]
    truncation: Option<f64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report destination (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// Catalog function the function-parametrized suites run on
    #[arg(long, global = true)]
    function: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent table and admissibility checks
    Params,
    /// Evaluate one norm of one catalog function
    Norm { function: String, spec: String },
    /// Distribution/rearrangement checks for one catalog function
    Rearrange { function: String },
    /// Mollifier approximation residuals for one catalog function
    Approx { function: String },
    /// Run a verification suite: params | norms | rearrange |
    /// mollify-approx | inequalities | all
    Verify { suite: String },
    /// Run every suite
    Report {
        #[arg(long)]
        all: bool,
    },
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path)?;
    }
    config.apply_env()?;
    if let Some(v) = cli.n {
        config.n = v;
    }
    if let Some(v) = cli.s {
        config.s = v;
    }
    if let Some(v) = cli.p {
        config.p = v;
    }
    if let Some(v) = cli.a {
        config.a = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.samples {
        config.samples = v;
    }
    if let Some(v) = cli.samples_gagliardo {
        config.samples_gagliardo = v;
    }
    if let Some(v) = cli.truncation {
        config.truncation = v;
    }
    if let Some(v) = cli.workers {
        config.workers = v;
    }
    if let Some(v) = &cli.function {
        config.function = v.clone();
    }
    if let Some(v) = &cli.format {
        config.format = OutputFormat::parse(v)?;
    }
    // every run validates its exponent bundle up front
    config.params()?;
    Ok(config)
}

fn jobs_for_command(command: &Command, config: &RunConfig) -> anyhow::Result<Vec<Job>> {
    match command {
        Command::Params => suites::jobs_for_suite("params", config),
        Command::Verify { suite } => suites::jobs_for_suite(suite, config),
        Command::Report { .. } => suites::jobs_for_suite("all", config),
        Command::Norm { function, spec } => {
            let cfg = config.clone();
            let function = function.clone();
            let spec_text = spec.clone();
            // parse eagerly so bad specs exit with a configuration error
            fraclab::norms::NormSpec::parse(&spec_text).map_err(|e| anyhow::anyhow!("{e}"))?;
            suites::function_by_name(&function, config.n as usize)?;
            Ok(vec![Job::new(
                format!("norm/{function}/{spec_text}"),
                "norm",
                move || {
                    let params = cfg.params()?;
                    let u = suites::function_by_name(&function, params.dim() as usize)?;
                    let spec = fraclab::norms::NormSpec::parse(&spec_text)
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    let est = spec
                        .evaluate(&u, &params, &cfg.mc_gagliardo())
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    Ok(serde_json::to_value(est)?)
                },
            )])
        }
        Command::Rearrange { function } => {
            let mut config = config.clone();
            config.function = function.clone();
            suites::function_by_name(function, config.n as usize)?;
            suites::jobs_for_suite("rearrange", &config)
        }
        Command::Approx { function } => {
            let mut config = config.clone();
            config.function = function.clone();
            suites::function_by_name(function, config.n as usize)?;
            suites::jobs_for_suite("mollify-approx", &config)
        }
    }
}

fn write_output(bundle: &ReportBundle, config: &RunConfig, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let rendered = match config.format {
        OutputFormat::Json => bundle.to_json(),
        OutputFormat::Csv => bundle.to_csv(),
    };
    match out {
        Some(path) => std::fs::write(path, rendered)?,
        None => println!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("configuration error: {err}");
            return ExitCode::from(2);
        }
    };
    if config.workers > 0 {
        // job- and sample-level parallelism share one pool
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global()
        {
            eprintln!("configuration error: {err}");
            return ExitCode::from(2);
        }
    }
    let jobs = match jobs_for_command(&cli.command, &config) {
        Ok(jobs) => jobs,
        Err(err) => {
            eprintln!("configuration error: {err}");
            return ExitCode::from(2);
        }
    };
    let config_value = serde_json::to_value(&config).expect("config serializes");
    let bundle = run_jobs(config_value, jobs);
    for warning in &bundle.warnings {
        eprintln!("warning: {warning}");
    }
    if let Err(err) = write_output(&bundle, &config, cli.out.as_ref()) {
        eprintln!("output error: {err}");
        return ExitCode::from(2);
    }
    if bundle.has_violation() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
