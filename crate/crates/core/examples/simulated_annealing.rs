//! Anneals a logical problem and compares against the exact ground.

use chaintune::chains::{success_probability, GROUND_MATCH_TOLERANCE};
use chaintune::model::gen_fully_connected;
use chaintune::samplers::{exact_spectrum, Sampler, SimulatedAnnealing};

fn main() -> chaintune::Result<()> {
    let p = gen_fully_connected(16, 2)?;
    let ground = exact_spectrum(&p, None)?.ground_energy;
    for sweeps in [10, 100, 1000] {
        let sa = SimulatedAnnealing::new(sweeps, (0.1, 10.0))?;
        let reads = sa.sample(&p, 500, 42)?;
        println!(
            "{sweeps:>5} sweeps: best {}, p = {:.3} (exact ground {ground})",
            reads.min_energy().unwrap_or(f64::NAN),
            success_probability(&reads, ground, GROUND_MATCH_TOLERANCE)?
        );
    }
    let agg = SimulatedAnnealing::default().sample(&p, 200, 1)?.aggregated();
    println!("200 reads collapse to {} distinct states", agg.reads.len());
    Ok(())
}
