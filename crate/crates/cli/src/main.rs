//! Command-line front end: single runs, seeded batches, config validation.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Overrides};
use dcee_core::seeds::cell_seed;
use dcee_core::simulator::{compute_metrics, run_batch, run_episode};
use dcee_core::trace::{batch_report_json, batch_rmse_csv, metrics_json, posterior_json, trace_csv};
use dcee_core::Strategy;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dcee",
    about = "Autonomous plume source search: single runs, batches, config validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Path to the JSON config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the base seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Restrict to one strategy.
    #[arg(long, value_name = "dcee|mpc|entrotaxis", value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Override the repeat count (batch).
    #[arg(long, value_name = "N")]
    repeats: Option<usize>,
    /// Cap concurrent episodes.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the particle count of every scenario.
    #[arg(long, value_name = "N")]
    particles: Option<usize>,
    /// Override the planner horizon of every scenario.
    #[arg(long, value_name = "N")]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode per configured strategy on the first scenario.
    Run(CommonArgs),
    /// Run the full scenario battery x strategies x repeats.
    Batch(CommonArgs),
    /// Validate the config and print the normalized effective form.
    Validate(CommonArgs),
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let (args, runner): (&CommonArgs, fn(ConfigFile) -> ExitCode) = match &cli.command {
        Command::Run(a) => (a, cmd_run),
        Command::Batch(a) => (a, cmd_batch),
        Command::Validate(a) => (a, cmd_validate),
    };

    if let Some(jobs) = args.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let mut cfg = match ConfigFile::load(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let overrides = Overrides {
        seed: args.seed,
        strategy: args.strategy,
        repeats: args.repeats,
        out: args.out.clone(),
        particles: args.particles,
        horizon: args.horizon,
    };
    overrides.apply(&mut cfg);
    if let Err(e) = cfg.validate() {
        eprintln!("{e}");
        return ExitCode::from(EXIT_CONFIG);
    }

    runner(cfg)
}

fn cmd_validate(cfg: ConfigFile) -> ExitCode {
    match serde_json::to_string_pretty(&cfg) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cannot render effective config: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn write_file(dir: &PathBuf, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

fn cmd_run(cfg: ConfigFile) -> ExitCode {
    let scenario = &cfg.scenarios[0];
    if cfg.scenarios.len() > 1 {
        log::info!(
            "config has {} scenarios; `run` uses the first (`{}`)",
            cfg.scenarios.len(),
            scenario.name
        );
    }
    let mut failures = Vec::new();
    for (gi, &strategy) in cfg.strategies.iter().enumerate() {
        let mut sc = scenario.clone();
        sc.planner.strategy = strategy;
        sc.seed = cell_seed(cfg.base_seed, 0, gi, 0);
        match run_episode(&sc) {
            Ok(rec) => {
                let metrics = compute_metrics(&rec, &sc);
                let result = write_file(
                    &cfg.output_dir,
                    &format!("trace_{}.csv", strategy.name()),
                    &trace_csv(&rec, &sc),
                )
                .and_then(|_| {
                    write_file(
                        &cfg.output_dir,
                        &format!("posterior_{}.json", strategy.name()),
                        &posterior_json(&rec, &sc),
                    )
                })
                .and_then(|_| {
                    write_file(
                        &cfg.output_dir,
                        &format!("metrics_{}.json", strategy.name()),
                        &metrics_json(&metrics, &sc),
                    )
                });
                match result {
                    Ok(()) => println!(
                        "{}: final_rmse={:.3} source_acquired={} plume_acquired={}",
                        strategy.name(),
                        metrics.final_rmse,
                        metrics.source_acquired,
                        metrics.plume_acquired
                    ),
                    Err(e) => failures.push(format!("{}: write failed: {e}", strategy.name())),
                }
            }
            Err(e) => failures.push(format!("{}: episode failed: {e}", strategy.name())),
        }
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &failures {
            eprintln!("{f}");
        }
        eprintln!("partial outputs in {}", cfg.output_dir.display());
        ExitCode::from(EXIT_RUNTIME)
    }
}

fn cmd_batch(cfg: ConfigFile) -> ExitCode {
    let report = match run_batch(&cfg.scenarios, &cfg.strategies, cfg.repeats, cfg.base_seed) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let wrote = write_file(&cfg.output_dir, "batch_report.json", &batch_report_json(&report))
        .and_then(|_| write_file(&cfg.output_dir, "batch_rmse.csv", &batch_rmse_csv(&report)));
    if let Err(e) = wrote {
        eprintln!("cannot write batch outputs: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    let total = report.cells.len();
    let completed = report.completed();
    for s in &report.summaries {
        println!(
            "{}: cells={} completed={} source_acq={:.1}% plume_acq={:.1}%",
            s.strategy.name(),
            s.cells,
            s.completed,
            100.0 * s.source_acquisition_rate,
            100.0 * s.plume_acquisition_rate
        );
    }
    for cell in report.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "cell failed: scenario={} strategy={} repeat={}: {}",
            cell.scenario,
            cell.strategy.name(),
            cell.repeat,
            cell.error.as_deref().unwrap_or("unknown")
        );
    }
    if (completed as f64) >= 0.95 * total as f64 {
        ExitCode::SUCCESS
    } else {
        eprintln!("only {completed}/{total} cells completed");
        ExitCode::from(EXIT_RUNTIME)
    }
}
