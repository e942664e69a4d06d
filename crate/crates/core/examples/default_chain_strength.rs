//! The default chain-strength formula on a few problems.

use chaintune::model::{gen_fully_connected, gen_j1j2, IsingProblem};
use chaintune::parameterize::{default_chain_strength, default_chain_strength_with, ZeroCouplers};

fn main() -> chaintune::Result<()> {
    let k4 = IsingProblem::new(
        4,
        [],
        [(0, 1, 1.0), (0, 2, -1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, -1.0), (2, 3, 1.0)],
        "K4",
    )?;
    println!("K4        {:.4}", default_chain_strength(&k4)?);
    for j2 in [0.40, 0.42, 0.44, 0.46, 0.48] {
        let p = gen_j1j2(8, 1.0, j2)?;
        println!("8x8 J2={j2:.2} {:.4}", default_chain_strength(&p)?);
    }
    // with zeros counted (or dropped) in both the coupler count and the
    // degrees, rms(J) * sqrt(mean degree) collapses to sqrt(2 sum J^2 / N)
    for n in [8, 12, 16, 20, 24] {
        let p = gen_fully_connected(n, 1)?;
        println!(
            "K{n:<2} zeros counted {:.4}, zeros dropped {:.4}",
            default_chain_strength(&p)?,
            default_chain_strength_with(&p, ZeroCouplers::Exclude)?
        );
    }
    Ok(())
}
