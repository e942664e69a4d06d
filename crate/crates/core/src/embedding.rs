//! Minor embeddings: each logical variable maps to a connected chain of
//! physical qubits.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{format_err, read_file, write_file, Error, Result};
use crate::model::IsingProblem;
use crate::topology::HardwareGraph;

/// Logical variable to chain map. Chains are stored sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Embedding {
    chains: BTreeMap<usize, Vec<usize>>,
}

impl Embedding {
    pub fn new(chains: impl IntoIterator<Item = (usize, Vec<usize>)>) -> Self {
        let chains = chains
            .into_iter()
            .map(|(v, mut c)| {
                c.sort_unstable();
                c.dedup();
                (v, c)
            })
            .collect();
        Self { chains }
    }

    /// Variable `i` on qubit `i`.
    pub fn identity(num_vars: usize) -> Self {
        Self::new((0..num_vars).map(|i| (i, vec![i])))
    }

    pub fn chain(&self, var: usize) -> Option<&[usize]> {
        self.chains.get(&var).map(Vec::as_slice)
    }

    pub fn chains(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.chains.iter().map(|(&v, c)| (v, c.as_slice()))
    }

    pub fn num_chains(&self) -> usize {
        self.chains.len()
    }

    /// Total qubits over all chains.
    pub fn total_qubits(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    /// Qubits beyond one per variable.
    pub fn extra_qubits(&self) -> usize {
        self.total_qubits() - self.chains.len()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn all_singletons(&self) -> bool {
        self.chains.values().all(|c| c.len() == 1)
    }

    /// Distinct physical qubits in ascending order.
    pub fn used_qubits(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.chains.values().flatten().copied().collect();
        set.into_iter().collect()
    }

    /// `owner[q]` is the variable whose chain holds qubit `q`.
    pub fn owners(&self, num_qubits: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; num_qubits];
        for (&v, c) in &self.chains {
            for &q in c {
                if q < num_qubits {
                    owner[q] = Some(v);
                }
            }
        }
        owner
    }

    pub fn to_json(&self) -> Result<String> {
        let file = EmbeddingFile {
            chains: self.chains.iter().map(|(&v, c)| (v, c.clone())).collect(),
        };
        crate::jsonfmt::to_string_rows(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EmbeddingFile =
            serde_json::from_str(text).map_err(|e| format_err("embedding json", e.to_string()))?;
        let mut chains = BTreeMap::new();
        for (v, c) in file.chains {
            if chains.insert(v, c).is_some() {
                return Err(format_err("embedding json", format!("variable {v} listed twice")));
            }
        }
        Ok(Self::new(chains))
    }

    /// Short content hash, used to tag output files.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = self.to_json().unwrap_or_default();
        let hash = Sha256::digest(json.as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    chains: Vec<(usize, Vec<usize>)>,
}

pub fn save_embedding(embedding: &Embedding, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), embedding.to_json()?.as_bytes())
}

/// Loads an embedding and checks its chains against `graph`.
pub fn load_embedding(path: impl AsRef<Path>, graph: &HardwareGraph) -> Result<Embedding> {
    let path = path.as_ref();
    let emb = Embedding::from_json(&read_file(path)?).map_err(|e| match e {
        Error::Format { message, .. } => format_err(path.display().to_string(), message),
        other => other,
    })?;
    let report = validate_chains(&emb, graph);
    if report.is_valid() {
        Ok(emb)
    } else {
        Err(Error::InvalidEmbedding(report))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Violation {
    /// A qubit claimed by more than one chain.
    Overlap { qubit: usize, vars: Vec<usize> },
    /// A chain whose qubits do not induce a connected subgraph.
    Disconnection { var: usize },
    /// A nonzero logical coupler with no hardware edge between the chains.
    MissingEdge { u: usize, v: usize },
    /// A chain naming a qubit the graph does not have.
    DanglingQubit { var: usize, qubit: usize },
    /// A problem variable with no chain.
    UnmappedVariable { var: usize },
    EmptyChain { var: usize },
    /// A chain for a variable the problem does not have.
    UnknownVariable { var: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Overlap { qubit, vars } => {
                write!(f, "qubit {qubit} shared by chains {vars:?}")
            }
            Violation::Disconnection { var } => write!(f, "chain of {var} is disconnected"),
            Violation::MissingEdge { u, v } => {
                write!(f, "no hardware edge between chains of {u} and {v}")
            }
            Violation::DanglingQubit { var, qubit } => {
                write!(f, "chain of {var} uses nonexistent qubit {qubit}")
            }
            Violation::UnmappedVariable { var } => write!(f, "variable {var} has no chain"),
            Violation::EmptyChain { var } => write!(f, "chain of {var} is empty"),
            Violation::UnknownVariable { var } => {
                write!(f, "chain given for unknown variable {var}")
            }
        }
    }
}

/// Every problem found by [`validate`]; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn validate_chains(emb: &Embedding, graph: &HardwareGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let mut holders: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (var, chain) in emb.chains() {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { var });
            continue;
        }
        let mut in_range = true;
        for &q in chain {
            if q >= graph.num_qubits() {
                violations.push(Violation::DanglingQubit { var, qubit: q });
                in_range = false;
            }
            holders.entry(q).or_default().push(var);
        }
        if in_range && !is_connected(chain, graph) {
            violations.push(Violation::Disconnection { var });
        }
    }
    for (qubit, vars) in holders {
        if vars.len() > 1 {
            violations.push(Violation::Overlap { qubit, vars });
        }
    }
    ValidationReport { violations }
}

fn is_connected(chain: &[usize], graph: &HardwareGraph) -> bool {
    let Some(&start) = chain.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(q) = stack.pop() {
        for &n in graph.neighbors(q) {
            if chain.binary_search(&n).is_ok() && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == chain.len()
}

/// Checks an embedding of `problem` into `graph`.
pub fn validate(emb: &Embedding, problem: &IsingProblem, graph: &HardwareGraph) -> ValidationReport {
    let mut report = validate_chains(emb, graph);
    for var in 0..problem.num_vars() {
        if emb.chain(var).is_none() {
            report.violations.push(Violation::UnmappedVariable { var });
        }
    }
    for (var, _) in emb.chains() {
        if var >= problem.num_vars() {
            report.violations.push(Violation::UnknownVariable { var });
        }
    }
    for (u, v, value) in problem.couplers() {
        if value == 0.0 {
            continue;
        }
        let (Some(cu), Some(cv)) = (emb.chain(u), emb.chain(v)) else {
            continue;
        };
        let linked = cu.iter().any(|&a| {
            a < graph.num_qubits() && graph.neighbors(a).iter().any(|b| cv.binary_search(b).is_ok())
        });
        if !linked {
            report.violations.push(Violation::MissingEdge { u, v });
        }
    }
    report
}

/// Rip-up-and-reroute rounds before a try is abandoned.
const MAX_ROUNDS: usize = 400;
/// Extra rounds spent shortening chains once an embedding is overlap-free.
const SHRINK_ROUNDS: usize = 4;
/// Rounds without fewer overlaps before a try is abandoned.
const PATIENCE: usize = 40;

/// Randomized path-growth embedder.
///
/// Variables are placed starting from a highest-degree one, always taking
/// next the unplaced variable with the most placed neighbors (ties: higher
/// degree, then a seeded random key). A variable is rooted at the qubit
/// with the cheapest total path cost to its placed neighbors' chains and
/// grown along those shortest paths. A qubit already used by `u` other
/// chains costs `base^u`, with `base` the graph diameter, so chains may
/// overlap at first; later rounds rip up and reroute every chain until no
/// qubit is shared. Overlap-free results get a few shrinking passes that
/// keep a rerouted chain only if it is still disjoint and no longer than
/// before.
///
/// Deterministic in `(problem, graph, seed, max_tries)`.
pub fn find_embedding(
    problem: &IsingProblem,
    graph: &HardwareGraph,
    seed: u64,
    max_tries: usize,
) -> Result<Embedding> {
    let n = problem.num_vars();
    if problem_graph_matches(problem, graph) {
        return Ok(Embedding::identity(n));
    }
    let mut adj = vec![Vec::new(); n];
    for (i, j, v) in problem.couplers() {
        if v != 0.0 {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    if n > graph.num_qubits() {
        return Err(Error::EmbeddingNotFound { tries: 0 });
    }
    for attempt in 0..max_tries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut router = Router::new(graph, &adj);
        if let Some(chains) = router.run(&mut rng) {
            let emb = Embedding::new(chains.into_iter().enumerate());
            debug_assert!(validate(&emb, problem, graph).is_valid());
            return Ok(emb);
        }
    }
    Err(Error::EmbeddingNotFound { tries: max_tries })
}

fn problem_graph_matches(problem: &IsingProblem, graph: &HardwareGraph) -> bool {
    problem.num_vars() == graph.num_qubits()
        && problem.num_couplers() == graph.num_edges()
        && problem
            .couplers()
            .zip(graph.edges())
            .all(|((i, j, _), &(a, b))| (i, j) == (a, b))
}

struct Router<'a> {
    graph: &'a HardwareGraph,
    adj: &'a [Vec<usize>],
    usage: Vec<u32>,
    chains: Vec<Vec<usize>>,
    /// `costs[u]` is the weight of a qubit shared with `u` other chains.
    costs: Vec<u64>,
    base: u64,
}

fn overlap_costs(base: u64, n: usize) -> Vec<u64> {
    let mut costs = vec![1u64];
    for _ in 0..n {
        let next = costs.last().unwrap().saturating_mul(base).min(u64::MAX >> 16);
        costs.push(next);
    }
    costs
}

impl<'a> Router<'a> {
    fn new(graph: &'a HardwareGraph, adj: &'a [Vec<usize>]) -> Self {
        let base = diameter(graph).max(2) as u64;
        Self {
            graph,
            adj,
            usage: vec![0; graph.num_qubits()],
            chains: vec![Vec::new(); adj.len()],
            costs: overlap_costs(base, adj.len()),
            base,
        }
    }

    /// Raises the price of shared qubits for the next round.
    fn escalate(&mut self) {
        self.base = (self.base * 2).min(1 << 20);
        self.costs = overlap_costs(self.base, self.adj.len());
    }

    fn run(&mut self, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
        let mut order = self.initial_order(rng);
        for &v in &order {
            let chain = self.route(v, rng)?;
            self.commit(v, chain);
        }
        let mut best = usize::MAX;
        let mut stale = 0;
        for _ in 0..MAX_ROUNDS {
            let overlaps = self.overlaps();
            if overlaps == 0 {
                self.shrink(&order, rng);
                return Some(std::mem::take(&mut self.chains));
            }
            if overlaps < best {
                best = overlaps;
                stale = 0;
            } else {
                stale += 1;
                if stale > PATIENCE {
                    return None;
                }
                // stuck: clear the congested neighborhood and place it afresh
                self.replace_region(rng)?;
                continue;
            }
            self.escalate();
            order.shuffle(rng);
            for &v in &order {
                self.release(v);
                let chain = self.route(v, rng)?;
                self.commit(v, chain);
            }
        }
        None
    }

    /// Releases every variable within two hops of an overlapping chain and
    /// routes them again, most-constrained first.
    fn replace_region(&mut self, rng: &mut ChaCha8Rng) -> Option<()> {
        let n = self.adj.len();
        let mut region = vec![false; n];
        for v in 0..n {
            if self.chains[v].iter().any(|&q| self.usage[q] > 1) {
                region[v] = true;
            }
        }
        for _ in 0..2 {
            let frontier: Vec<usize> = (0..n).filter(|&v| region[v]).collect();
            for v in frontier {
                for &u in &self.adj[v] {
                    region[u] = true;
                }
            }
        }
        let mut pending: Vec<usize> = (0..n).filter(|&v| region[v]).collect();
        for &v in &pending {
            self.release(v);
        }
        pending.shuffle(rng);
        while !pending.is_empty() {
            let (i, _) = pending.iter().enumerate().max_by_key(|&(_, &v)| {
                self.adj[v].iter().filter(|&&u| !self.chains[u].is_empty()).count()
            })?;
            let v = pending.swap_remove(i);
            let chain = self.route(v, rng)?;
            self.commit(v, chain);
        }
        Some(())
    }

    fn initial_order(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = self.adj.len();
        let keys: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
        let mut placed_nbrs = vec![0usize; n];
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let next = (0..n)
                .filter(|&v| !done[v])
                .max_by_key(|&v| (placed_nbrs[v], self.adj[v].len(), keys[v]))
                .expect("unplaced variable remains");
            done[next] = true;
            for &u in &self.adj[next] {
                placed_nbrs[u] += 1;
            }
            order.push(next);
        }
        order
    }

    fn weight(&self, q: usize) -> u64 {
        self.costs[(self.usage[q] as usize).min(self.costs.len() - 1)]
    }

    fn overlaps(&self) -> usize {
        self.usage.iter().map(|&u| (u as usize).saturating_sub(1)).sum()
    }

    /// Node-weighted shortest paths out of the chain of `var`. Chain qubits
    /// sit at distance 0; `prev` leads back toward the chain.
    fn dijkstra(&self, var: usize) -> (Vec<u64>, Vec<usize>) {
        let nq = self.graph.num_qubits();
        let mut dist = vec![u64::MAX; nq];
        let mut prev = vec![usize::MAX; nq];
        let mut heap = BinaryHeap::new();
        for &q in &self.chains[var] {
            dist[q] = 0;
            heap.push(Reverse((0u64, q)));
        }
        while let Some(Reverse((d, q))) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            for &n in self.graph.neighbors(q) {
                let nd = d + self.weight(n);
                if nd < dist[n] {
                    dist[n] = nd;
                    prev[n] = q;
                    heap.push(Reverse((nd, n)));
                }
            }
        }
        (dist, prev)
    }

    fn route(&self, var: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let placed: Vec<usize> = self.adj[var]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        let nq = self.graph.num_qubits();
        if placed.is_empty() {
            // cheapest qubit, preferring well-connected ones
            let mut best: Option<(u64, std::cmp::Reverse<usize>, u32, usize)> = None;
            for q in 0..nq {
                let key = (self.weight(q), std::cmp::Reverse(self.graph.degree(q)), rng.gen(), q);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
            return best.map(|b| vec![b.3]);
        }
        let trees: Vec<(Vec<u64>, Vec<usize>)> = placed.iter().map(|&u| self.dijkstra(u)).collect();
        let mut best: Option<(u64, u32, usize)> = None;
        for q in 0..nq {
            let mut cost = self.weight(q);
            let mut reachable = true;
            for (dist, _) in &trees {
                if dist[q] == u64::MAX {
                    reachable = false;
                    break;
                }
                // the root's own weight is already counted once
                cost += dist[q].saturating_sub(self.weight(q).min(dist[q]));
            }
            if !reachable {
                continue;
            }
            let key = (cost, rng.gen::<u32>(), q);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        let root = best?.2;
        let mut chain = BTreeSet::from([root]);
        // a root inside a neighbor's chain is an overlap, priced out later
        for ((_, prev), &u) in trees.iter().zip(&placed) {
            let target = &self.chains[u];
            let mut cur = root;
            while target.binary_search(&cur).is_err() {
                chain.insert(cur);
                let next = prev[cur];
                if target.binary_search(&next).is_ok() {
                    break;
                }
                cur = next;
            }
        }
        let mut chain: Vec<usize> = chain.into_iter().collect();
        self.prune(&mut chain, &placed);
        Some(chain)
    }

    /// Drops leaf qubits the chain does not need to stay connected and to
    /// touch every placed neighbor.
    fn prune(&self, chain: &mut Vec<usize>, placed: &[usize]) {
        loop {
            let removable = chain.iter().position(|&q| {
                if chain.len() == 1 {
                    return false;
                }
                let inner = self.graph.neighbors(q).iter().filter(|n| chain.binary_search(n).is_ok()).count();
                if inner != 1 {
                    return false;
                }
                let rest: Vec<usize> = chain.iter().copied().filter(|&x| x != q).collect();
                placed.iter().all(|&u| self.touches(&rest, u))
            });
            match removable {
                Some(i) => {
                    chain.remove(i);
                }
                None => break,
            }
        }
    }

    fn touches(&self, chain: &[usize], var: usize) -> bool {
        let target = &self.chains[var];
        chain.iter().any(|&q| {
            target.binary_search(&q).is_ok()
                || self.graph.neighbors(q).iter().any(|n| target.binary_search(n).is_ok())
        })
    }

    fn commit(&mut self, var: usize, chain: Vec<usize>) {
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[var] = chain;
    }

    fn release(&mut self, var: usize) -> Vec<usize> {
        let chain = std::mem::take(&mut self.chains[var]);
        for &q in &chain {
            self.usage[q] -= 1;
        }
        chain
    }

    fn shrink(&mut self, order: &[usize], rng: &mut ChaCha8Rng) {
        for _ in 0..SHRINK_ROUNDS {
            let mut improved = false;
            for &v in order {
                let old = self.release(v);
                let keep = match self.route(v, rng) {
                    Some(new)
                        if new.len() <= old.len()
                            && new.iter().all(|&q| self.usage[q] == 0)
                            && self.links_all(&new, v) =>
                    {
                        improved |= new.len() < old.len();
                        new
                    }
                    _ => old,
                };
                self.commit(v, keep);
            }
            if !improved {
                break;
            }
        }
    }

    /// `chain` is adjacent to every neighbor chain of `var`.
    fn links_all(&self, chain: &[usize], var: usize) -> bool {
        self.adj[var].iter().all(|&u| {
            let target = &self.chains[u];
            chain.iter().any(|&q| {
                self.graph
                    .neighbors(q)
                    .iter()
                    .any(|n| target.binary_search(n).is_ok())
            })
        })
    }
}

/// Exact diameter of the largest component by BFS from every qubit, or a
/// two-sweep estimate on big graphs.
fn diameter(graph: &HardwareGraph) -> usize {
    let nq = graph.num_qubits();
    let ecc = |src: usize| -> (usize, usize) {
        let mut dist = vec![usize::MAX; nq];
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        let mut far = (0, src);
        while let Some(q) = queue.pop_front() {
            for &n in graph.neighbors(q) {
                if dist[n] == usize::MAX {
                    dist[n] = dist[q] + 1;
                    far = far.max((dist[n], n));
                    queue.push_back(n);
                }
            }
        }
        far
    };
    if nq == 0 {
        return 0;
    }
    if nq <= 1024 {
        (0..nq).map(|q| ecc(q).0).max().unwrap_or(0)
    } else {
        let (_, a) = ecc(0);
        ecc(a).0
    }
}
