//! Generates Chimera and Pegasus graphs and round-trips one through JSON.

use chaintune::topology::{gen_chimera, gen_pegasus, HardwareGraph};

fn main() -> chaintune::Result<()> {
    for m in 1..=4 {
        let g = gen_chimera(m)?;
        println!("{}: {} qubits, {} edges", g.kind(), g.num_qubits(), g.num_edges());
    }
    for m in 2..=6 {
        let g = gen_pegasus(m)?;
        println!(
            "{}: {} qubits, {} edges, max degree {}",
            g.kind(),
            g.num_qubits(),
            g.num_edges(),
            g.max_degree()
        );
    }

    let custom = HardwareGraph::from_json(r#"{"num_qubits": 4, "edges": [[0,1],[1,2],[2,3]], "kind": "custom"}"#)?;
    println!("custom path: {} qubits, {} edges", custom.num_qubits(), custom.num_edges());
    match HardwareGraph::from_json(r#"{"num_qubits": 2, "edges": [[0,0]], "kind": "custom"}"#) {
        Ok(_) => println!("self-loop accepted?"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
