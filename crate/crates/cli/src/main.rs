//! `invsim`: collect expert data, train the student network, and run or
//! compare controllers on scenario files.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure.

mod commands;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invsim::nn::{Activation, FeatureLayout};
use invsim::plant::DEFAULT_SUBSTEPS;
use invsim::sim::SimOptions;

#[derive(Debug, Parser)]
#[command(name = "invsim", version, about = "Predictive inverter control and its neural imitation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the predictive controller over a scenario grid and write a labelled dataset.
    Collect(CollectArgs),
    /// Train the network on a collected dataset.
    Train(TrainArgs),
    /// Run one scenario closed-loop and write its waveforms.
    Simulate(SimulateArgs),
    /// Run both controllers on every scenario and write a comparison table.
    Compare(CompareArgs),
    /// Harmonic distortion of one column of a waveform CSV.
    Thd(ThdArgs),
}

#[derive(Debug, Clone, Args)]
struct SimFlags {
    /// RK4 substeps per sampling period in the plant simulation.
    #[arg(long, default_value_t = DEFAULT_SUBSTEPS)]
    substeps: usize,
    /// Hand controllers the reference one sample ahead.
    #[arg(long)]
    reference_advance: bool,
}

impl SimFlags {
    fn options(&self) -> SimOptions {
        SimOptions {
            substeps: self.substeps,
            reference_advance: self.reference_advance,
            ..SimOptions::default()
        }
    }
}

#[derive(Debug, Args)]
struct CollectArgs {
    /// Scenario file; the built-in 60-case resistive grid when omitted.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Fundamental cycles per scenario when the file does not say.
    #[arg(long, default_value_t = 5.0)]
    cycles: f64,
    /// Dataset CSV to write.
    #[arg(short, long)]
    output: PathBuf,
    /// Skip scenarios that fail instead of stopping.
    #[arg(long)]
    keep_going: bool,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ActivationArg {
    Tanh,
    Logistic,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Logistic => Activation::Logistic,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset CSV written by `collect`.
    #[arg(long)]
    dataset: PathBuf,
    /// Model file to write.
    #[arg(short, long)]
    output: PathBuf,
    /// JSON training report; `<output>.report.json` when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    #[arg(long, default_value_t = 50)]
    patience: usize,
    #[arg(long, default_value_t = 15)]
    hidden: usize,
    #[arg(long, value_enum, default_value = "tanh")]
    activation: ActivationArg,
    /// Append the previous instant's features (16 inputs).
    #[arg(long)]
    delayed_features: bool,
}

impl TrainArgs {
    fn layout(&self) -> FeatureLayout {
        if self.delayed_features {
            FeatureLayout::Delayed
        } else {
            FeatureLayout::Base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControllerKind {
    Mpc,
    Ann,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenarios: PathBuf,
    /// Scenario id; may be omitted when the file holds one scenario.
    #[arg(long)]
    id: Option<String>,
    #[arg(long, value_enum)]
    controller: ControllerKind,
    /// Model file, required for `--controller ann`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Feed the network the estimated rather than the measured output current.
    #[arg(long)]
    io_estimate: bool,
    /// Simulated fundamental cycles; enough for the distortion window when omitted.
    #[arg(long)]
    cycles: Option<f64>,
    /// Waveform CSV to write.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    scenarios: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Comparison CSV to write.
    #[arg(short, long)]
    output: PathBuf,
    /// Directory for per-scenario waveform CSVs.
    #[arg(long)]
    waveforms: Option<PathBuf>,
    #[arg(long)]
    io_estimate: bool,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Debug, Args)]
struct ThdArgs {
    /// Waveform CSV with a `t` column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "vc_a")]
    column: String,
    #[arg(long, default_value_t = 50.0)]
    fundamental: f64,
    #[arg(long, default_value_t = invsim::analysis::DEFAULT_MAX_HARMONIC)]
    max_harmonic: usize,
    /// Cycles skipped before the analysis window.
    #[arg(long, default_value_t = invsim::analysis::STEADY_STATE_SKIP_CYCLES)]
    skip_cycles: f64,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Input(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<invsim::Error> for Failure {
    fn from(e: invsim::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Collect(a) => commands::collect(a),
        Command::Train(a) => commands::train(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Thd(a) => commands::thd_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
