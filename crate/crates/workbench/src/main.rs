//! Workbench for sensorless BLDC position/speed estimation.
//!
//! Pipeline: `simulate` a PWM-driven motor and acquire conditioned
//! terminal voltages, `label` the rows with encoder-derived rotor states,
//! `train` the position and speed networks, `eval` them against the
//! simulated encoder at fixed speeds, and `run` the drive sensorlessly on
//! the trained estimators.

mod commands;
mod config;
mod error;
mod io;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bldc-workbench",
    version,
    about = "Simulate, train and evaluate sensorless BLDC position/speed estimation"
)]
struct Cli {
    /// Print extra progress detail (seeds, timing).
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a drive cycle and write the conditioned dataset.
    Simulate(commands::simulate::SimulateArgs),
    /// Attach rotor-state labels to a conditioned dataset.
    Label(commands::label::LabelArgs),
    /// Train the position or speed network.
    Train(commands::train::TrainArgs),
    /// Evaluate trained models at fixed speeds.
    Eval(commands::eval::EvalArgs),
    /// Drive sensorlessly with trained models.
    Run(commands::run::RunArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args, cli.verbose),
        Command::Label(args) => commands::label::run(args, cli.verbose),
        Command::Train(args) => commands::train::run(args, cli.verbose),
        Command::Eval(args) => commands::eval::run(args, cli.verbose),
        Command::Run(args) => commands::run::run(args, cli.verbose),
    };
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
