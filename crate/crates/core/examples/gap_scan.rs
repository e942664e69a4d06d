//! Exact embedded gap versus chain strength on the shipped 25-qubit
//! embedding of the 4x4 lattice.
//!
//! ```sh
//! cargo run --release --example gap_scan -- 0.46
//! ```

use chaintune::embedding::load_embedding;
use chaintune::model::gen_j1j2;
use chaintune::spectrum::{gap_scan, jc_grid};
use chaintune::topology::gen_pegasus;

fn main() -> chaintune::Result<()> {
    let j2: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.42), |a| a.parse())
        .expect("J2/J1 must be a number");
    let graph = gen_pegasus(3)?;
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/embedding_4x4_pegasus3.json");
    let emb = load_embedding(path, &graph)?;
    let p = gen_j1j2(4, 1.0, j2)?;
    let scan = gap_scan(&p, &emb, &graph, &jc_grid(0.5, 4.0, 0.1)?)?;
    println!("logical gap {}", scan.logical_delta);
    for pt in &scan.points {
        let bar = "#".repeat((pt.delta_c * 20.0).round() as usize);
        println!("{:>5.2} {:>8.4} {bar}", pt.jc, pt.delta_c);
    }
    println!("J_c* = {:?}, kink at {:?}", scan.j_c_star, scan.j_c_kink);
    Ok(())
}
