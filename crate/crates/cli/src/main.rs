//! Command-line runner: execute attack scenarios and compare them against
//! baselines, emitting trajectory CSVs, JSON summaries, and SVG figures.
//!
//! Exit codes: 0 for a clean run, 1 for configuration or I/O errors, 2 when
//! a run ended in a collision.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use platoon_core::engine::{run, RunOutput};
use platoon_core::metrics::{summarize, RunSummary};
use platoon_core::plot::render_timeseries_svg;
use platoon_core::scenario_io::{
    parse_scenario, write_summary_json, write_trajectory_csv, LoadedScenario,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_COLLISION: u8 = 2;

#[derive(Parser)]
#[command(name = "platoon-sim", about = "Single-lane CAV platoon attack simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run {
        /// Scenario JSON file.
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a baseline and an attacked scenario of the same platoon and
    /// report per-vehicle delays at the checkpoint.
    Compare {
        /// Baseline scenario JSON file.
        baseline: PathBuf,
        /// Attacked scenario JSON file.
        attacked: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory (created if absent).
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Also render the four-panel time-series figure.
    #[arg(long)]
    plot: bool,
    /// Override the scenario's delay checkpoint, m.
    #[arg(long)]
    checkpoint: Option<f64>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, common } => cmd_run(&scenario, &common),
        Command::Compare { baseline, attacked, common } => cmd_compare(&baseline, &attacked, &common),
    };
    match result {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn load(path: &Path) -> Result<LoadedScenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn write_artifact(dir: &Path, name: &str, contents: &str, force: bool) -> Result<(), CliError> {
    let path = dir.join(name);
    if path.exists() && !force {
        return Err(CliError(format!(
            "{} already exists; pass --force to overwrite",
            path.display()
        )));
    }
    fs::write(&path, contents).map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn exit_for(summary: &RunSummary) -> ExitCode {
    if summary.collisions.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_COLLISION)
    }
}

fn print_summary_line(summary: &RunSummary) {
    let max_delay = summary
        .delays
        .as_ref()
        .and_then(|d| d.values().cloned().reduce(f64::max));
    match max_delay {
        Some(d) => println!(
            "collisions: {}, max delay at {} m: {d:.2} s",
            summary.collisions.len(),
            summary.checkpoint
        ),
        None => println!(
            "collisions: {}, arrivals at {} m: {}",
            summary.collisions.len(),
            summary.checkpoint,
            summary.arrivals.len()
        ),
    }
}

fn cmd_run(scenario_path: &Path, common: &Common) -> Result<ExitCode, CliError> {
    let loaded = load(scenario_path)?;
    let checkpoint = common.checkpoint.unwrap_or(loaded.checkpoint);
    let out = run(&loaded.scenario)?;
    let summary = summarize(&out.log, &out.collisions, checkpoint, None);

    fs::create_dir_all(&common.out)?;
    write_artifact(&common.out, "trajectory.csv", &write_trajectory_csv(&out.log), common.force)?;
    write_artifact(&common.out, "summary.json", &write_summary_json(&summary), common.force)?;
    if common.plot {
        let svg = render_timeseries_svg(&out.log, &out.collisions)?;
        write_artifact(&common.out, "figure.svg", &svg, common.force)?;
    }
    print_summary_line(&summary);
    Ok(exit_for(&summary))
}

fn cmd_compare(
    baseline_path: &Path,
    attacked_path: &Path,
    common: &Common,
) -> Result<ExitCode, CliError> {
    let baseline = load(baseline_path)?;
    let attacked = load(attacked_path)?;
    let same_platoon = baseline.scenario.n_vehicles == attacked.scenario.n_vehicles
        && baseline.scenario.params == attacked.scenario.params
        && baseline.scenario.dt == attacked.scenario.dt;
    if !same_platoon {
        return Err(CliError(
            "baseline and attacked scenarios describe different platoons \
             (n_vehicles, params, and dt must match)"
                .to_string(),
        ));
    }
    let checkpoint = common.checkpoint.unwrap_or(attacked.checkpoint);

    let base_out: RunOutput = run(&baseline.scenario)?;
    let atk_out: RunOutput = run(&attacked.scenario)?;
    let summary = summarize(&atk_out.log, &atk_out.collisions, checkpoint, Some(&base_out.log));

    fs::create_dir_all(&common.out)?;
    write_artifact(
        &common.out,
        "baseline_trajectory.csv",
        &write_trajectory_csv(&base_out.log),
        common.force,
    )?;
    write_artifact(
        &common.out,
        "attacked_trajectory.csv",
        &write_trajectory_csv(&atk_out.log),
        common.force,
    )?;
    write_artifact(&common.out, "summary.json", &write_summary_json(&summary), common.force)?;
    if common.plot {
        let svg = render_timeseries_svg(&atk_out.log, &atk_out.collisions)?;
        write_artifact(&common.out, "figure.svg", &svg, common.force)?;
    }
    print_summary_line(&summary);
    Ok(exit_for(&summary))
}
