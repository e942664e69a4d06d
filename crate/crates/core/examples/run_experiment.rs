//! Library-side equivalent of `chaintune <command> --config <file>`.
//!
//! ```sh
//! cargo run --release --example run_experiment -- gapscan data/gapscan_4x4.json /tmp/scan
//! ```

use std::path::PathBuf;

use chaintune::experiment::{run, Command, ExperimentConfig};

fn main() -> chaintune::Result<()> {
    let mut args = std::env::args().skip(1);
    let command: Command = args.next().unwrap_or_else(|| "problem".into()).parse()?;
    let config = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/tune_identity.json").into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let cfg = ExperimentConfig::load(&config)?;
    println!("config hash {}", cfg.hash());
    for f in run(command, &cfg, &out)?.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
