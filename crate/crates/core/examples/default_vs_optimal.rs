//! Success probability at the default and at the tuned chain strength for
//! one fully connected instance.

use chaintune::experiment::{compare_point, ExperimentConfig};
use chaintune::model::gen_fully_connected;
use chaintune::topology::gen_pegasus;

fn main() -> chaintune::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "seed": 3,
            "problem": {"family": "fully_connected", "n": 12, "seed": 3},
            "graph": {"kind": "pegasus", "m": 4},
            "measure_reads": 1000,
            "sampler": {"sweeps": 300}
        }"#,
    )?;
    let p = gen_fully_connected(12, 3)?;
    let g = gen_pegasus(4)?;
    let (row, trace) = compare_point(&cfg, &p, &g, "example")?;
    println!("{} tuning steps", trace.trace.len());
    println!("{row:#?}");
    Ok(())
}
