use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info};
use thermalizer::harness::{exit_code, run, validate_config, write_record, Experiment};
use thermalizer::{Error, Result};

/// Runs a seeded thermal-state preparation experiment and writes CSV and JSON results.
#[derive(Debug, Parser)]
#[command(name = "thermalizer", version)]
struct Cli {
    /// gibbs, train, sweep-beta, entropy-bench, grad-variance, depth-study, symmetry-check or qoft-bench
    #[arg(value_parser = parse_experiment)]
    experiment: Experiment,

    /// JSON config file.
    #[arg(long)]
    config: PathBuf,

    /// Reduced sizes and fewer seeds.
    #[arg(long)]
    quick: bool,

    /// Replace the configured seeds with this one.
    #[arg(long)]
    seed_override: Option<u64>,

    /// Output directory; defaults to the config's output_path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_experiment(s: &str) -> std::result::Result<Experiment, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn execute(cli: &Cli) -> Result<i32> {
    let raw = std::fs::read_to_string(&cli.config)?;
    let mut config = validate_config(&raw)?;
    if cli.quick {
        config = config.quick();
    }
    if let Some(seed) = cli.seed_override {
        config = config.with_seed_override(seed);
    }
    config.validate()?;
    let record = run(cli.experiment, &config)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.output_path));
    let (csv_path, json_path) = write_record(&record, &out)?;
    info!("wrote {} and {}", csv_path.display(), json_path.display());
    match cli.experiment {
        Experiment::SymmetryCheck => println!("{}", serde_json::to_string_pretty(&record.summary["reports"])?),
        Experiment::Train => println!("{}", serde_json::to_string_pretty(&record.summary["runs"])?),
        _ => println!("{}", csv_path.display()),
    }
    for v in &record.violations {
        error!("{v}");
        eprintln!("invariant violated: {v}");
    }
    Ok(if record.violations.is_empty() { 0 } else { exit_code(&Error::Invariant(String::new())) })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
