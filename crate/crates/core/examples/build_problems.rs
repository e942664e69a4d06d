//! Builds the two benchmark families and evaluates a few energies.
//!
//! ```sh
//! cargo run --example build_problems
//! ```

use chaintune::model::{gen_fully_connected, gen_j1j2, Configuration};

fn main() -> chaintune::Result<()> {
    let lattice = gen_j1j2(4, 1.0, 0.42)?;
    println!(
        "4x4 J1-J2: {} spins, {} couplers",
        lattice.num_vars(),
        lattice.num_couplers()
    );
    let up = Configuration::all_up(lattice.num_vars());
    println!("  all-up energy     {}", lattice.energy(&up)?);
    println!("  all-down energy   {}", lattice.energy(&up.flipped())?);

    let dense = gen_fully_connected(8, 3)?;
    let zeros = dense.couplers().filter(|&(_, _, v)| v == 0.0).count();
    println!(
        "K8 instance: {} couplers, {} of them explicit zeros",
        dense.num_couplers(),
        zeros
    );
    println!("{}", dense.to_json()?);
    Ok(())
}
