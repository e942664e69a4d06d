use std::path::PathBuf;
use std::process::ExitCode;

use chaintune::experiment::{run, Command, ExperimentConfig};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Problem,
    Embed,
    Tune,
    Sample,
    Gapscan,
    Experiment,
}

/// Embedded Ising problems, exact gap scans and chain-strength tuning.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Problem => Command::Problem,
        Cmd::Embed => Command::Embed,
        Cmd::Tune => Command::Tune,
        Cmd::Sample => Command::Sample,
        Cmd::Gapscan => Command::Gapscan,
        Cmd::Experiment => Command::Experiment,
    };
    let result = ExperimentConfig::load(&args.config)
        .map(|c| c.with_seed(args.seed))
        .and_then(|c| run(command, &c, &args.out));
    match result {
        Ok(out) => {
            println!("{}", serde_json::json!({ "ok": true, "files": out.files }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "ok": false, "error": { "kind": e.kind(), "message": e.to_string() } })
            );
            ExitCode::from(1)
        }
    }
}
