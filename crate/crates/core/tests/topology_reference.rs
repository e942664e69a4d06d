use chaintune::topology::{gen_chimera, gen_pegasus, HardwareGraph};

fn reference(name: &str) -> HardwareGraph {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    HardwareGraph::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn chimera_2_matches_frozen_edge_list() {
    let r = reference("chimera2_reference.json");
    let g = gen_chimera(2).unwrap();
    assert_eq!(g.num_qubits(), r.num_qubits());
    assert_eq!(g.edges(), r.edges());
}

#[test]
fn pegasus_2_matches_frozen_edge_list() {
    let r = reference("pegasus2_reference.json");
    let g = gen_pegasus(2).unwrap();
    assert_eq!(g.num_qubits(), r.num_qubits());
    assert_eq!(g.edges(), r.edges());
}
