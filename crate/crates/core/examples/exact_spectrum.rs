//! Exhaustive enumeration of small problems.

use chaintune::model::{gen_fully_connected, gen_j1j2};
use chaintune::samplers::exact_spectrum;

fn main() -> chaintune::Result<()> {
    let p = gen_j1j2(2, 1.0, 0.42)?;
    let s = exact_spectrum(&p, None)?;
    println!(
        "2x2: E0 = {} (x{}), E1 = {:?} (x{}), gap = {:?}",
        s.ground_energy,
        s.ground_degeneracy,
        s.first_excited_energy,
        s.excited_degeneracy,
        s.gap()
    );
    for g in &s.ground_states {
        println!("  ground state {:?}", g.spins());
    }

    for j2 in [0.42, 0.46, 0.48] {
        let s = exact_spectrum(&gen_j1j2(4, 1.0, j2)?, None)?;
        println!("4x4 J2={j2}: E0 = {}, gap = {:?}", s.ground_energy, s.gap());
    }

    let t = std::time::Instant::now();
    let s = exact_spectrum(&gen_fully_connected(24, 1)?, Some(-60.0))?;
    println!(
        "K24: E0 = {}, degeneracy {}, {} states below -60 ({:.2?})",
        s.ground_energy,
        s.ground_degeneracy,
        s.states_below_cutoff.unwrap_or(0),
        t.elapsed()
    );
    Ok(())
}
