use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wellprobe::experiment::{run_experiment, ExperimentConfig, Mode};

/// Probe the well-posedness of discretized differential equations.
#[derive(Parser, Debug)]
#[command(name = "wellprobe", version)]
struct Cli {
    /// Worker threads for ensembles and drop searches (default: all cores).
    #[arg(long, global = true, env = "WELLPROBE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ensemble statistics: mean, variance and error maps.
    Probe(RunArgs),
    /// Patch dimension versus rhomb perimeter.
    Scaling(RunArgs),
    /// Exhaustive drop search or constraint-weight sweep.
    Maxfs(RunArgs),
    /// Randomized Kaczmarz runs with traces.
    Kaczmarz(RunArgs),
    /// Whatever mode the config file names.
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size or Kaczmarz seed count override.
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mode override; must fit the subcommand.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

fn allowed_modes(cmd: &Command) -> Option<&'static [Mode]> {
    match cmd {
        Command::Probe(_) => Some(&[Mode::Ensemble]),
        Command::Scaling(_) => Some(&[Mode::PerimeterScaling]),
        Command::Maxfs(_) => Some(&[Mode::DropSearch, Mode::WeightSweep]),
        Command::Kaczmarz(_) => Some(&[Mode::Kaczmarz]),
        Command::Run(_) => None,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    let allowed = allowed_modes(&cli.command);
    let (Command::Probe(args) | Command::Scaling(args) | Command::Maxfs(args) | Command::Kaczmarz(args) | Command::Run(args)) =
        cli.command;

    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    let mut flags = BTreeMap::new();
    flags.insert("config".to_string(), args.config.display().to_string());
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
        flags.insert("seed".into(), seed.to_string());
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
        flags.insert("runs".into(), runs.to_string());
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
        flags.insert("out".into(), out.display().to_string());
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
        flags.insert("mode".into(), mode.as_str().to_string());
    }
    if let Some(allowed) = allowed {
        if !allowed.contains(&cfg.mode) {
            if allowed.len() == 1 && args.mode.is_none() {
                cfg.mode = allowed[0];
            } else {
                let names: Vec<&str> = allowed.iter().map(|m| m.as_str()).collect();
                bail!("mode {} does not fit this subcommand (expected one of: {})", cfg.mode.as_str(), names.join(", "));
            }
        }
    }
    cfg.validate()?;

    let summary = run_experiment(&cfg, &flags)?;
    println!("{}", cfg.output_dir.join("summary.json").display());
    for failure in &summary.failures {
        eprintln!("warning: {failure}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
