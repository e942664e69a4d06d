//! Runs the chain-strength sweep on an embedded 6x6 lattice and prints the
//! trace.

use chaintune::embedding::find_embedding;
use chaintune::model::gen_j1j2;
use chaintune::samplers::SimulatedAnnealing;
use chaintune::topology::gen_pegasus;
use chaintune::tuner::{tune, TuneConfig};

fn main() -> chaintune::Result<()> {
    let p = gen_j1j2(6, 1.0, 0.42)?;
    let g = gen_pegasus(4)?;
    let emb = find_embedding(&p, &g, 1, 20)?;
    println!("{} logical spins on {} qubits", p.num_vars(), emb.total_qubits());
    let sa = SimulatedAnnealing::new(500, (0.1, 10.0))?;
    let r = tune(&p, &emb, &g, &sa, &TuneConfig { seed: 4, ..TuneConfig::default() })?;
    print!("{}", r.trace_csv());
    println!(
        "status {:?}: default {:.4}, J_c* {:?}, optimal {:?}",
        r.status, r.jc_default, r.jc_star, r.jc_optimal
    );
    Ok(())
}
