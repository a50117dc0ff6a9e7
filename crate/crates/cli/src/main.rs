//! Command-line front end for the wiretap simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wiretap_core::sim::{
    emit_plot_script, emit_results, preset, render, run_scenario, OutputFormat, Scenario, SweepAxis, PRESETS,
};

#[derive(Parser)]
#[command(name = "wiretap", version, about = "MIMO-OFDM wiretap link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write the BER/MSE curve.
    Simulate(SimulateArgs),
    /// Inspect the built-in scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// List preset names and descriptions.
    List,
    /// Print a preset as scenario JSON.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name (see `scenario list`).
    #[arg(long)]
    preset: Option<String>,
    /// Override the number of trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a gnuplot script for the CSV output.
    #[arg(long)]
    emit_plotscript: Option<PathBuf>,
}

fn load(args: &SimulateArgs) -> Result<Scenario> {
    let mut sc = match (&args.scenario, &args.preset) {
        (Some(path), _) => Scenario::from_json_file(path)?,
        (None, Some(name)) => preset(name).with_context(|| format!("unknown preset '{name}'"))?,
        (None, None) => bail!("either --scenario or --preset is required"),
    };
    if let Some(t) = args.trials {
        sc.trials = t;
    }
    if let Some(s) = args.seed {
        sc.master_seed = s;
    }
    sc.validate()?;
    Ok(sc)
}

fn axis_label(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::TransmitPowerDb => "transmit power P_t / noise (dB)",
        SweepAxis::NTxAntennas => "transmit antennas N_A",
        SweepAxis::MseCap => "MSE cap gamma_b",
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let sc = load(&args)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let points = run_scenario(&sc, workers)?;
    for p in &points {
        if let Some(d) = &p.diagnostic {
            eprintln!("sweep value {}: {d}", p.sweep_value);
        }
    }
    let format = OutputFormat::from(args.format);
    match &args.out {
        Some(path) => emit_results(&points, path, format)?,
        None => print!("{}", render(&points, format)?),
    }
    if let Some(script) = &args.emit_plotscript {
        let csv = match (&args.out, format) {
            (Some(path), OutputFormat::Csv) => path.display().to_string(),
            _ => bail!("--emit-plotscript needs CSV output written with --out"),
        };
        let title = args
            .preset
            .clone()
            .or_else(|| args.scenario.as_ref().map(|p| p.display().to_string()))
            .unwrap_or_default();
        emit_plot_script(script, &csv, axis_label(sc.sweep_axis), &title)?;
    }
    if points.iter().all(|p| p.fully_infeasible()) {
        eprintln!("every sweep point was infeasible under the MSE cap");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn scenario_command(cmd: ScenarioCommand) -> Result<ExitCode> {
    match cmd {
        ScenarioCommand::List => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, p.description);
            }
        }
        ScenarioCommand::Show { name } => {
            let sc = preset(&name).with_context(|| format!("unknown preset '{name}'"))?;
            println!("{}", serde_json::to_string_pretty(&sc)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Scenario(cmd) => scenario_command(cmd),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
