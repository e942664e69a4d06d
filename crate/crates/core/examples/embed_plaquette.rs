//! Embeds a 2x2 J1-J2 plaquette and a 4x4 lattice onto Pegasus and checks
//! the result with the validator.

use chaintune::embedding::{find_embedding, validate, Embedding};
use chaintune::model::gen_j1j2;
use chaintune::topology::gen_pegasus;

fn main() -> chaintune::Result<()> {
    let graph = gen_pegasus(2)?;
    let plaquette = gen_j1j2(2, 1.0, 0.42)?;
    let emb = find_embedding(&plaquette, &graph, 0, 10)?;
    for (v, chain) in emb.chains() {
        println!("var {v} -> {chain:?}");
    }
    println!("valid: {}", validate(&emb, &plaquette, &graph).is_valid());

    let lattice = gen_j1j2(4, 1.0, 0.42)?;
    let big = gen_pegasus(3)?;
    let emb = find_embedding(&lattice, &big, 7, 10)?;
    println!(
        "4x4 on {}: {} qubits, {} beyond one per variable, longest chain {}",
        big.kind(),
        emb.total_qubits(),
        emb.extra_qubits(),
        emb.max_chain_length()
    );

    // a broken hand-written embedding: both variables on qubit 0
    let bad = Embedding::new([(0, vec![0]), (1, vec![0]), (2, vec![1]), (3, vec![2])]);
    for v in &validate(&bad, &plaquette, &graph).violations {
        println!("violation: {v:?}");
    }
    Ok(())
}
