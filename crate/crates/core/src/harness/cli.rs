//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 numerical failure or tolerance miss (details as JSON on stderr).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::operator::apply;
use crate::symbols::{mihlin_estimate, MihlinOptions, ProbeSet};

use super::config::ExperimentConfig;
use super::experiments::{
    boundedness_experiment, decompose, ensemble_inputs, norm_report, norm_scan, region_sweep,
};
use super::report::{write_json, write_norm_csv, write_norm_scan_csv, write_region_csv, write_samples_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hormander", version, about = "Multilinear pseudo-differential operator experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Replaces `ensemble.seed`.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate the operator on the first ensemble sample (apply.csv).
    Apply,
    /// Symbol norm report (norm.csv, plus norm_scan.csv when `norm.s_list` is set).
    Norm,
    /// Mihlin-class estimate (classify.json).
    Classify,
    /// Exponent-region sweep (region.csv).
    Region,
    /// Output-frequency split diagnostics (decompose.json).
    Decompose,
    /// Boundedness ensemble (bench.json).
    Bench,
}

enum Outcome {
    Done(Vec<PathBuf>),
    ToleranceMiss(Vec<PathBuf>, String),
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "status": kind, "message": message }));
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            report_error("config_error", &format!("thread pool: {e}"));
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(Outcome::Done(files)) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Ok(Outcome::ToleranceMiss(files, detail)) => {
            for f in files {
                println!("{}", f.display());
            }
            report_error("tolerance_failure", &detail);
            EXIT_NUMERICAL
        }
        Err(e) if e.is_config() => {
            report_error("config_error", &e.to_string());
            EXIT_CONFIG
        }
        Err(e) => {
            report_error("numerical_failure", &e.to_string());
            EXIT_NUMERICAL
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("--config", "a configuration file is required"))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed_override {
        config.ensemble.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    std::fs::create_dir_all(&out)?;
    match cli.command {
        Command::Apply => {
            let grid = config.grid()?;
            let symbol = config.symbol()?;
            let plan = crate::operator::OperatorPlan::new(
                &grid,
                symbol.clone(),
                config.norm.levels,
                None,
                config.strategy(symbol.as_ref()),
            )?;
            let inputs = ensemble_inputs(&config, &grid, 0, 0)?;
            let file = out.join("apply.csv");
            write_samples_csv(&file, &apply(&plan, &inputs)?)?;
            Ok(Outcome::Done(vec![file]))
        }
        Command::Norm => {
            let report = norm_report(&config)?;
            let file = out.join("norm.csv");
            write_norm_csv(&file, &report)?;
            let mut files = vec![file];
            if !config.norm.s_list.is_empty() {
                let grid = config.grid()?;
                let symbol = config.symbol()?;
                let probes = vec![vec![0.0; grid.dim()]];
                let scan = norm_scan(
                    symbol.as_ref(),
                    &config.norm.s_list,
                    config.norm.levels,
                    config.norm.delta,
                    config.norm.band,
                    &probes,
                )?;
                let file = out.join("norm_scan.csv");
                write_norm_scan_csv(&file, &scan)?;
                files.push(file);
            }
            Ok(Outcome::Done(files))
        }
        Command::Classify => {
            let grid = config.grid()?;
            let symbol = config.symbol()?;
            let m = &config.mihlin;
            let report = mihlin_estimate(
                symbol.as_ref(),
                MihlinOptions::new(m.rho, m.delta, m.order),
                &grid,
                &ProbeSet::standard(grid.dim(), grid.linearity()),
            )?;
            let file = out.join("classify.json");
            write_json(&file, &report)?;
            Ok(Outcome::Done(vec![file]))
        }
        Command::Region => {
            let rows = region_sweep(&config)?;
            let file = out.join("region.csv");
            write_region_csv(&file, config.region.n, &rows)?;
            Ok(Outcome::Done(vec![file]))
        }
        Command::Decompose => {
            let report = decompose(&config)?;
            let file = out.join("decompose.json");
            write_json(&file, &report)?;
            if report.within_tolerance {
                Ok(Outcome::Done(vec![file]))
            } else {
                let detail = format!(
                    "reconstruction error {:.3e} (tolerance {:.0e}), exact II support: {}",
                    report.diagnostics.reconstruction_error, report.tolerance, report.second_support_exact
                );
                Ok(Outcome::ToleranceMiss(vec![file], detail))
            }
        }
        Command::Bench => {
            let report = boundedness_experiment(&config)?;
            let file = out.join("bench.json");
            write_json(&file, &report)?;
            if report.stable {
                Ok(Outcome::Done(vec![file]))
            } else {
                let spreads: Vec<f64> = report.groups.iter().map(|g| g.spread).collect();
                Ok(Outcome::ToleranceMiss(
                    vec![file],
                    format!("max/median per group {spreads:?} not all below 3"),
                ))
            }
        }
    }
}
