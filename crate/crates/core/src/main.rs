use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qubit_pair::cli::{load_config, run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Sweep,
    Converge,
    Steady,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Sweep => Command::Sweep,
            Cmd::Converge => Command::Converge,
            Cmd::Steady => Command::Steady,
        }
    }
}

/// Dissipative dynamics and entanglement of two interacting qubits.
#[derive(Debug, Parser)]
#[command(name = "qubit-pair", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config entry, e.g. `--set K_L=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = load_config(
        args.command.into(),
        &args.config,
        &args.set,
        args.out.as_deref(),
        args.workers,
    )
    .and_then(|cfg| run(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
