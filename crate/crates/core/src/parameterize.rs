//! Physical Hamiltonians: logical problem terms spread over chains plus a
//! uniform ferromagnetic chain coupling.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::embedding::{validate, Embedding};
use crate::error::{arg, write_file, Error, Result};
use crate::model::{IsingProblem, ProblemFile};
use crate::topology::HardwareGraph;

/// Prefactor of the default chain-strength heuristic.
pub const DEFAULT_CHAIN_PREFACTOR: f64 = 1.41;

/// Whether explicit zero couplers count toward the default chain strength.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZeroCouplers {
    #[default]
    Include,
    Exclude,
}

/// `1.41 * rms(J) * sqrt(mean logical degree)`.
pub fn default_chain_strength(problem: &IsingProblem) -> Result<f64> {
    default_chain_strength_with(problem, ZeroCouplers::Include)
}

pub fn default_chain_strength_with(problem: &IsingProblem, zeros: ZeroCouplers) -> Result<f64> {
    let mut count = 0usize;
    let mut sum_sq = 0.0;
    let mut deg_sum = 0usize;
    for (_, _, v) in problem.couplers() {
        if zeros == ZeroCouplers::Exclude && v == 0.0 {
            continue;
        }
        count += 1;
        sum_sq += v * v;
        deg_sum += 2;
    }
    if count == 0 {
        return Err(arg("default chain strength needs at least one coupler"));
    }
    let rms = (sum_sq / count as f64).sqrt();
    let mean_degree = deg_sum as f64 / problem.num_vars() as f64;
    Ok(DEFAULT_CHAIN_PREFACTOR * rms * mean_degree.sqrt())
}

/// A logical problem laid out on hardware.
///
/// The physical problem is indexed over the qubits the embedding actually
/// uses, in ascending hardware order; `qubits()` maps those local indices
/// back to hardware labels. All edge lists below use local indices.
#[derive(Clone, Debug)]
pub struct EmbeddedProblem {
    physical: IsingProblem,
    qubits: Vec<usize>,
    local_embedding: Embedding,
    chain_edges: BTreeMap<usize, Vec<(usize, usize)>>,
    inter_edges: BTreeMap<(usize, usize), Vec<(usize, usize)>>,
    chain_strength: f64,
    logical: IsingProblem,
    embedding: Embedding,
}

/// Builds `H = H_problem + H_chain` at chain strength `chain_strength`.
///
/// Every hardware edge inside a chain carries `-chain_strength`. A logical
/// coupler is split equally over all hardware edges joining its two chains,
/// and a field equally over its chain's qubits.
pub fn embed_problem(
    problem: &IsingProblem,
    embedding: &Embedding,
    graph: &HardwareGraph,
    chain_strength: f64,
) -> Result<EmbeddedProblem> {
    if !(chain_strength > 0.0) || !chain_strength.is_finite() {
        return Err(arg(format!("chain strength must be positive, got {chain_strength}")));
    }
    let report = validate(embedding, problem, graph);
    if !report.is_valid() {
        return Err(Error::InvalidEmbedding(report));
    }
    let qubits = embedding.used_qubits();
    let mut local = vec![usize::MAX; graph.num_qubits()];
    for (i, &q) in qubits.iter().enumerate() {
        local[q] = i;
    }
    let owner = embedding.owners(graph.num_qubits());
    let local_embedding = Embedding::new(
        embedding
            .chains()
            .map(|(v, c)| (v, c.iter().map(|&q| local[q]).collect())),
    );

    let mut chain_edges: BTreeMap<usize, Vec<(usize, usize)>> =
        embedding.chains().map(|(v, _)| (v, Vec::new())).collect();
    let mut between: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for &(a, b) in graph.edges() {
        let (Some(va), Some(vb)) = (owner[a], owner[b]) else {
            continue;
        };
        let e = (local[a], local[b]);
        if va == vb {
            chain_edges.get_mut(&va).expect("chain exists").push(e);
        } else {
            // orient so the edge reads (chain of min var, chain of max var)
            let (key, e) = if va < vb { ((va, vb), e) } else { ((vb, va), (e.1, e.0)) };
            between.entry(key).or_default().push(e);
        }
    }

    let mut couplers = Vec::new();
    for edges in chain_edges.values() {
        couplers.extend(edges.iter().map(|&(a, b)| (a, b, -chain_strength)));
    }
    let mut inter_edges = BTreeMap::new();
    for (i, j, value) in problem.couplers() {
        let edges = between.get(&(i, j)).cloned().unwrap_or_default();
        if !edges.is_empty() {
            let share = value / edges.len() as f64;
            couplers.extend(edges.iter().map(|&(a, b)| (a, b, share)));
        }
        inter_edges.insert((i, j), edges);
    }
    let mut fields = Vec::new();
    for (v, chain) in local_embedding.chains() {
        let h = problem.field(v);
        if h != 0.0 {
            let share = h / chain.len() as f64;
            fields.extend(chain.iter().map(|&q| (q, share)));
        }
    }
    let physical = IsingProblem::new(
        qubits.len(),
        fields,
        couplers,
        format!("{} embedded jc={chain_strength}", problem.label()),
    )?;
    Ok(EmbeddedProblem {
        physical,
        qubits,
        local_embedding,
        chain_edges,
        inter_edges,
        chain_strength,
        logical: problem.clone(),
        embedding: embedding.clone(),
    })
}

impl EmbeddedProblem {
    pub fn physical(&self) -> &IsingProblem {
        &self.physical
    }

    pub fn logical(&self) -> &IsingProblem {
        &self.logical
    }

    /// Chains in hardware labels.
    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    /// Chains in the physical problem's local indices; use this with
    /// samples drawn from [`EmbeddedProblem::physical`].
    pub fn sample_embedding(&self) -> &Embedding {
        &self.local_embedding
    }

    /// Hardware label of each local qubit.
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn chain_strength(&self) -> f64 {
        self.chain_strength
    }

    pub fn chain_edges(&self) -> &BTreeMap<usize, Vec<(usize, usize)>> {
        &self.chain_edges
    }

    pub fn inter_edges(&self) -> &BTreeMap<(usize, usize), Vec<(usize, usize)>> {
        &self.inter_edges
    }

    pub fn num_chain_edges(&self) -> usize {
        self.chain_edges.values().map(Vec::len).sum()
    }

    /// Energy of all chain couplers when every chain is intact.
    pub fn intact_chain_energy(&self) -> f64 {
        -self.chain_strength * self.num_chain_edges() as f64
    }

    /// Same layout at another chain strength.
    pub fn with_chain_strength(&self, chain_strength: f64) -> Result<EmbeddedProblem> {
        if !(chain_strength > 0.0) || !chain_strength.is_finite() {
            return Err(arg(format!("chain strength must be positive, got {chain_strength}")));
        }
        let mut couplers = Vec::with_capacity(self.physical.num_couplers());
        for edges in self.chain_edges.values() {
            couplers.extend(edges.iter().map(|&(a, b)| (a, b, -chain_strength)));
        }
        for (&(i, j), edges) in &self.inter_edges {
            if !edges.is_empty() {
                let value = self.logical.coupler(i, j).unwrap_or(0.0);
                let share = value / edges.len() as f64;
                couplers.extend(edges.iter().map(|&(a, b)| (a, b, share)));
            }
        }
        let fields: Vec<(usize, f64)> = (0..self.physical.num_vars())
            .map(|q| (q, self.physical.field(q)))
            .filter(|&(_, h)| h != 0.0)
            .collect();
        let physical = IsingProblem::new(
            self.physical.num_vars(),
            fields,
            couplers,
            format!("{} embedded jc={chain_strength}", self.logical.label()),
        )?;
        Ok(EmbeddedProblem {
            physical,
            chain_strength,
            ..self.clone()
        })
    }

    /// Physical problem JSON with an `embedding` sidecar block.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            chain_strength: f64,
            qubits: &'a [usize],
            chains: Vec<(usize, &'a [usize])>,
            num_chain_edges: usize,
        }
        #[derive(Serialize)]
        struct File<'a> {
            #[serde(flatten)]
            problem: ProblemFile,
            embedding: Sidecar<'a>,
        }
        let file = File {
            problem: ProblemFile::from(&self.physical),
            embedding: Sidecar {
                chain_strength: self.chain_strength,
                qubits: &self.qubits,
                chains: self.embedding.chains().collect(),
                num_chain_edges: self.num_chain_edges(),
            },
        };
        crate::jsonfmt::to_string_rows(&file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_fully_connected, gen_j1j2, Configuration};
    use crate::topology::{gen_chimera, GraphKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn default_strength_reference_values() {
        let k4 = IsingProblem::new(
            4,
            [],
            [(0, 1, 1.0), (0, 2, -1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, -1.0), (2, 3, 1.0)],
            "",
        )
        .unwrap();
        assert!(close(default_chain_strength(&k4).unwrap(), 1.41 * 3f64.sqrt(), 1e-12));
        assert!(close(default_chain_strength(&k4).unwrap(), 2.4422, 1e-4));

        let lattice = gen_j1j2(8, 1.0, 0.42).unwrap();
        let expected = 1.41 * (129.2872f64 / 210.0).sqrt() * (420.0f64 / 64.0).sqrt();
        let got = default_chain_strength(&lattice).unwrap();
        assert!(close(got, expected, 1e-9));
        assert!(close(got, 2.834, 1e-3));

        let pair = IsingProblem::new(2, [], [(0, 1, -1.0)], "").unwrap();
        assert!(close(default_chain_strength(&pair).unwrap(), 1.41, 1e-15));
    }

    #[test]
    fn default_strength_zero_policy() {
        let p = IsingProblem::new(3, [], [(0, 1, -1.0), (1, 2, 0.0)], "").unwrap();
        let inc = default_chain_strength(&p).unwrap();
        let exc = default_chain_strength_with(&p, ZeroCouplers::Exclude).unwrap();
        assert!(close(inc, 1.41 * 0.5f64.sqrt() * (4.0f64 / 3.0).sqrt(), 1e-12));
        assert!(close(exc, 1.41 * (2.0f64 / 3.0).sqrt(), 1e-12));
        let empty = IsingProblem::new(3, [], [], "").unwrap();
        assert!(default_chain_strength(&empty).is_err());
    }

    #[test]
    fn identity_embedding_reproduces_problem() {
        let p = gen_j1j2(3, 1.0, 0.42).unwrap();
        let g = HardwareGraph::from_problem(&p);
        let ep = embed_problem(&p, &Embedding::identity(9), &g, 2.0).unwrap();
        assert_eq!(ep.num_chain_edges(), 0);
        assert_eq!(
            ep.physical().couplers().collect::<Vec<_>>(),
            p.couplers().collect::<Vec<_>>()
        );
    }

    #[test]
    fn coupler_split_over_parallel_edges() {
        // chain {0,1} for var 0, {2,3} for var 1 on a 4-cycle: two edges join them
        let g = HardwareGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)], GraphKind::Custom).unwrap();
        let p = IsingProblem::new(2, [(0, 0.3)], [(0, 1, -1.0)], "").unwrap();
        let emb = Embedding::new([(0, vec![0, 1]), (1, vec![2, 3])]);
        let ep = embed_problem(&p, &emb, &g, 1.68).unwrap();
        assert_eq!(ep.inter_edges()[&(0, 1)].len(), 2);
        assert_eq!(ep.physical().coupler(1, 2), Some(-0.5));
        assert_eq!(ep.physical().coupler(0, 3), Some(-0.5));
        assert_eq!(ep.physical().coupler(0, 1), Some(-1.68));
        assert_eq!(ep.physical().coupler(2, 3), Some(-1.68));
        assert_eq!(ep.physical().field(0), 0.15);
        assert_eq!(ep.physical().field(1), 0.15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = HardwareGraph::new(3, [(0, 1), (1, 2)], GraphKind::Custom).unwrap();
        let p = IsingProblem::new(2, [], [(0, 1, -1.0)], "").unwrap();
        let good = Embedding::new([(0, vec![0]), (1, vec![1])]);
        assert!(embed_problem(&p, &good, &g, 0.0).is_err());
        let bad = Embedding::new([(0, vec![0]), (1, vec![2])]);
        assert!(matches!(
            embed_problem(&p, &bad, &g, 1.0),
            Err(Error::InvalidEmbedding(_))
        ));
    }

    #[test]
    fn energy_consistency_on_intact_chains() {
        let p = gen_fully_connected(7, 4).unwrap();
        let g = gen_chimera(3).unwrap();
        let emb = crate::embedding::find_embedding(&p, &g, 2, 30).unwrap();
        let ep = embed_problem(&p, &emb, &g, 1.3).unwrap();
        let local = ep.sample_embedding();
        for bits in 0..1u64 << 7 {
            let logical = Configuration::from_bits(bits, 7);
            let mut phys = vec![1i8; ep.num_qubits()];
            for (v, chain) in local.chains() {
                for &q in chain {
                    phys[q] = logical[v];
                }
            }
            let lhs = ep.physical().energy(&phys).unwrap();
            let rhs = p.energy(&logical).unwrap() + ep.intact_chain_energy();
            assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn rescaling_matches_fresh_build() {
        let p = gen_j1j2(3, 1.0, 0.46).unwrap();
        let g = gen_chimera(3).unwrap();
        let emb = crate::embedding::find_embedding(&p, &g, 0, 30).unwrap();
        let a = embed_problem(&p, &emb, &g, 0.7).unwrap().with_chain_strength(2.5).unwrap();
        let b = embed_problem(&p, &emb, &g, 2.5).unwrap();
        assert_eq!(a.physical(), b.physical());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn split_conservation(seed in 0u64..200, n in 3usize..8) {
            let p = gen_fully_connected(n, seed).unwrap();
            let g = gen_chimera(3).unwrap();
            let emb = crate::embedding::find_embedding(&p, &g, seed, 30).unwrap();
            let ep = embed_problem(&p, &emb, &g, 1.0).unwrap();
            for (i, j, v) in p.couplers() {
                let edges = &ep.inter_edges()[&(i, j)];
                let total: f64 = edges.iter().map(|&(a, b)| ep.physical().coupler(a, b).unwrap()).sum();
                if v != 0.0 {
                    proptest::prop_assert!((total - v).abs() < 1e-12);
                }
            }
            for edges in ep.chain_edges().values() {
                for &(a, b) in edges {
                    proptest::prop_assert_eq!(ep.physical().coupler(a, b), Some(-1.0));
                }
            }
        }
    }
}
