//! Sweep runner CLI.
//!
//! Runs seeded forecast-horizon trials for an OECT or tanh reservoir,
//! optionally sweeping one parameter, and writes the aggregated results
//! as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use oect_rc::harness::{
    export_results, sweep_with_records, write_trial_records, ExperimentConfig, ReservoirKind,
    SweepAxis,
};

#[derive(Parser)]
#[command(name = "simulate", about = "Forecast-horizon experiments for OECT reservoir computers")]
struct Args {
    /// TOML configuration file; defaults apply for every omitted key.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Parameter to sweep: n, v_p_mean, p, or alpha.
    #[arg(long, requires = "values")]
    axis: Option<SweepAxisArg>,

    /// Comma-separated list of axis values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,

    /// Trials per axis value (overrides the config).
    #[arg(long)]
    trials: Option<usize>,

    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,

    /// Reservoir kind: oect or tanh (overrides the config).
    #[arg(long)]
    kind: Option<ReservoirKindArg>,

    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,

    /// Optional per-trial dump CSV path.
    #[arg(long)]
    trial_dump: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct SweepAxisArg(SweepAxis);

impl std::str::FromStr for SweepAxisArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(SweepAxisArg)
    }
}

#[derive(Clone, Copy)]
struct ReservoirKindArg(ReservoirKind);

impl std::str::FromStr for ReservoirKindArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(ReservoirKindArg)
    }
}

fn run(args: Args) -> Result<(), String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(kind) = args.kind {
        cfg.kind = kind.0;
    }

    // Without an explicit axis, run the configured point as a one-value
    // sweep over p so the output schema stays uniform.
    let (axis, values) = match (args.axis, &args.values) {
        (Some(axis), Some(values)) => (axis.0, values.clone()),
        _ => (SweepAxis::P, vec![cfg.p]),
    };
    if values.is_empty() {
        return Err("--values must list at least one value".into());
    }

    let (table, records) = sweep_with_records(&cfg, axis, &values);
    for row in &table.rows {
        println!(
            "{} = {}: mean FH {:.4}, std {:.4} ({} trials, {} failures)",
            table.axis, row.value, row.mean_fh, row.std_fh, row.trials, row.failures
        );
    }
    export_results(&table, &args.out).map_err(|e| e.to_string())?;
    println!("wrote {}", args.out.display());
    if let Some(dump) = &args.trial_dump {
        write_trial_records(&records, dump).map_err(|e| e.to_string())?;
        println!("wrote {}", dump.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
