//! Samples an embedded problem at a weak and a strong chain strength and
//! post-processes the reads.

use chaintune::chains::{detect_breaks, success_probability, unembed_with, UnembedPolicy};
use chaintune::embedding::find_embedding;
use chaintune::model::gen_j1j2;
use chaintune::parameterize::embed_problem;
use chaintune::samplers::{exact_spectrum, Sampler, SimulatedAnnealing};
use chaintune::topology::gen_pegasus;

fn main() -> chaintune::Result<()> {
    let p = gen_j1j2(4, 1.0, 0.42)?;
    let g = gen_pegasus(3)?;
    let emb = find_embedding(&p, &g, 3, 10)?;
    let ground = exact_spectrum(&p, None)?.ground_energy;
    let sa = SimulatedAnnealing::new(300, (0.1, 10.0))?;
    for jc in [0.3, 1.0, 3.0] {
        let ep = embed_problem(&p, &emb, &g, jc)?;
        let reads = sa.sample(ep.physical(), 1000, 5)?;
        let report = detect_breaks(&reads, ep.sample_embedding())?;
        print!(
            "jc {jc}: broken chains {:.4}, reads with a break {:.3}",
            report.aggregate_broken_fraction, report.broken_read_fraction
        );
        for policy in [UnembedPolicy::MajorityVote, UnembedPolicy::Discard] {
            let logical = unembed_with(&reads, ep.sample_embedding(), &p, 9, policy)?;
            match success_probability(&logical, ground, 1e-9) {
                Ok(pr) => print!(", {policy:?} p = {pr:.3} of {}", logical.total_reads()),
                Err(_) => print!(", {policy:?} kept no reads"),
            }
        }
        println!();
    }
    Ok(())
}
