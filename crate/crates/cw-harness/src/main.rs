//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 usage/config/IO error, 2 assertion or audit
//! failure.

use clap::{Parser, Subcommand};
use cw_harness::experiments;
use cw_harness::io::{read_sample_csv, write_sample_csv, VoteCoding};
use cw_harness::{ConfigFile, RunContext, RunOutcome};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cw-harness", version, about = "Curie-Weiss subset-estimator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Restrict report files to one format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample and write it as CSV.
    Sample,
    /// Estimate couplings from a sample CSV.
    Estimate {
        /// Sample CSV to ingest.
        #[arg(long)]
        input: PathBuf,
        /// Treat entries as 1/0 instead of 1/-1.
        #[arg(long)]
        zero_one: bool,
        /// Confidence level for the plug-in intervals.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
    },
    /// Consistency sweep over the sample-size grid.
    Consistency,
    /// CLT variance and normality verification.
    Clt,
    /// Confidence-interval coverage study.
    Coverage,
    /// Estimator-equivalence audit over a population grid.
    Equivalence,
    /// Exact-versus-asymptotic moment error curves.
    ApproxError,
    /// Compare zeta against the exact ML-condition root.
    MlCompare,
    /// Regenerate interval width constants.
    CalibrateConstants,
}

fn load_config(cli: &Cli) -> anyhow::Result<ConfigFile> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("this subcommand requires --config"))?;
    let mut cfg = ConfigFile::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.set("experiment", "seed", &seed.to_string());
    }
    Ok(cfg)
}

fn context(cli: &Cli, cfg: Option<&ConfigFile>) -> anyhow::Result<RunContext> {
    std::fs::create_dir_all(&cli.out)?;
    let mut ctx = RunContext::new(cli.out.clone());
    ctx.threads = cli.threads;
    match cli.format.as_deref() {
        Some("csv") => ctx.write_json = false,
        Some("json") => ctx.write_csv = false,
        _ => {}
    }
    if let Some(cfg) = cfg {
        ctx.meta = cfg.resolved();
    }
    if let Some(seed) = cli.seed {
        ctx.meta.insert("experiment.seed".into(), seed.to_string());
    }
    Ok(ctx)
}

fn dispatch(cli: &Cli) -> anyhow::Result<RunOutcome> {
    match &cli.command {
        Command::Sample => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            let spec = cfg.model()?;
            let n_obs: usize = cfg.get("experiment", "n_obs")?;
            let seed: u64 = cfg.get("experiment", "seed")?;
            let stream: u64 = cfg.opt("experiment", "stream_id")?.unwrap_or(0);
            let sample =
                cw_core::sample_multigroup(&spec, n_obs, &cw_core::SamplerConfig::new(seed, stream));
            let path = ctx.path("sample.csv");
            write_sample_csv(&path, &sample)?;
            println!("wrote {} observations to {}", n_obs, path.display());
            Ok(RunOutcome::Passed)
        }
        Command::Estimate {
            input,
            zero_one,
            level,
        } => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            let coding = if *zero_one {
                VoteCoding::ZeroOne
            } else {
                VoteCoding::PlusMinus
            };
            let sample = read_sample_csv(input, coding)?;
            cw_harness::estimate::run(&cfg, &ctx, &sample, *level)
        }
        Command::Consistency => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            experiments::consistency::run(&cfg, &ctx)
        }
        Command::Clt => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            experiments::clt::run(&cfg, &ctx)
        }
        Command::Coverage => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            experiments::coverage::run(&cfg, &ctx)
        }
        Command::Equivalence => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            experiments::equivalence::run(&cfg, &ctx)
        }
        Command::ApproxError => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            experiments::approx_error::run(&cfg, &ctx)
        }
        Command::MlCompare => {
            let cfg = load_config(cli)?;
            let ctx = context(cli, Some(&cfg))?;
            experiments::ml_compare::run(&cfg, &ctx)
        }
        Command::CalibrateConstants => {
            let cfg = match &cli.config {
                Some(_) => load_config(cli)?,
                None => ConfigFile::parse("")?,
            };
            let ctx = context(cli, Some(&cfg))?;
            experiments::calibrate::run(&cfg, &ctx)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(RunOutcome::Passed) => ExitCode::SUCCESS,
        Ok(RunOutcome::AssertionsFailed) => {
            eprintln!("assertions failed; see reports in the output directory");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
