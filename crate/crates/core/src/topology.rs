//! Hardware connectivity graphs.
//!
//! Chimera and Pegasus graphs use the standard D-Wave linear indexing, so
//! qubit labels line up with the usual published layouts. Only ideal
//! (defect-free) graphs are generated.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{arg, format_err, read_file, write_file, Result};
use crate::model::IsingProblem;

/// Vertical qubit offsets of the standard Pegasus tile.
const PEGASUS_VERTICAL_OFFSETS: [usize; 12] = [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6];
/// Horizontal qubit offsets of the standard Pegasus tile.
const PEGASUS_HORIZONTAL_OFFSETS: [usize; 12] = [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Chimera(usize),
    Pegasus(usize),
    Custom,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Chimera(m) => write!(f, "chimera({m})"),
            GraphKind::Pegasus(m) => write!(f, "pegasus({m})"),
            GraphKind::Custom => f.write_str("custom"),
        }
    }
}

impl std::str::FromStr for GraphKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_m = |prefix: &str| -> Option<usize> {
            s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?.parse().ok()
        };
        if s == "custom" {
            Ok(GraphKind::Custom)
        } else if let Some(m) = parse_m("chimera") {
            Ok(GraphKind::Chimera(m))
        } else if let Some(m) = parse_m("pegasus") {
            Ok(GraphKind::Pegasus(m))
        } else {
            Err(arg(format!("unknown graph kind {s:?}")))
        }
    }
}

/// Physical qubit connectivity.
///
/// Edges are kept as a sorted `(a, b)` list with `a < b`, plus per-qubit
/// sorted neighbor lists.
#[derive(Clone, Debug, PartialEq)]
pub struct HardwareGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    kind: GraphKind,
    coordinates: Option<Vec<Vec<usize>>>,
}

impl HardwareGraph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range
    /// endpoints. Edge orientation is normalized.
    pub fn new(
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        kind: GraphKind,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(arg(format!("self-loop on qubit {a}")));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(arg(format!("edge ({a}, {b}) out of range for {num_qubits} qubits")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(arg(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self::from_sorted(num_qubits, set.into_iter().collect(), kind))
    }

    fn from_sorted(num_qubits: usize, edges: Vec<(usize, usize)>, kind: GraphKind) -> Self {
        let mut neighbors = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        Self {
            num_qubits,
            edges,
            neighbors,
            kind,
            coordinates: None,
        }
    }

    /// The coupler graph of a logical problem, zero couplers included.
    pub fn from_problem(problem: &IsingProblem) -> Self {
        let edges = problem.couplers().map(|(i, j, _)| (i, j)).collect();
        Self::from_sorted(problem.num_vars(), edges, GraphKind::Custom)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors[q].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// Lattice coordinates per qubit: `(i, j, u, k)` for Chimera,
    /// `(u, w, k, z)` for Pegasus.
    pub fn coordinates(&self) -> Option<&[Vec<usize>]> {
        self.coordinates.as_deref()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GraphFile {
            num_qubits: Some(self.num_qubits),
            edges: self.edges.clone(),
            kind: Some(self.kind.to_string()),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| format_err("graph json", e.to_string()))?;
        let num_qubits = file.num_qubits.unwrap_or_else(|| {
            file.edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0)
        });
        let mut seen = BTreeSet::new();
        for (idx, &(a, b)) in file.edges.iter().enumerate() {
            let problem = if a == b {
                Some("self-loop")
            } else if a >= num_qubits || b >= num_qubits {
                Some("endpoint out of range")
            } else if !seen.insert((a.min(b), a.max(b))) {
                Some("duplicate edge")
            } else {
                None
            };
            if let Some(problem) = problem {
                return Err(format_err(
                    format!("graph json line {}", edge_line(text, idx)),
                    format!("edge #{idx} [{a}, {b}]: {problem}"),
                ));
            }
        }
        // declared kinds are not trusted: a loaded file is a custom graph
        // unless it is exactly the generated one
        let kind = match file.kind.as_deref().map(str::parse::<GraphKind>) {
            Some(Ok(k @ (GraphKind::Chimera(m) | GraphKind::Pegasus(m)))) if m >= 1 => {
                let generated = match k {
                    GraphKind::Chimera(m) => gen_chimera(m).ok(),
                    _ => gen_pegasus(m).ok(),
                };
                match generated {
                    Some(g) if g.num_qubits == num_qubits && g.edges == seen.iter().copied().collect::<Vec<_>>() => {
                        return Ok(g);
                    }
                    _ => GraphKind::Custom,
                }
            }
            _ => GraphKind::Custom,
        };
        Ok(Self::from_sorted(num_qubits, seen.into_iter().collect(), kind))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }
}

/// Reads a graph from a JSON edge-list file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<HardwareGraph> {
    let path = path.as_ref();
    HardwareGraph::from_json(&read_file(path)?).map_err(|e| match e {
        crate::Error::Format { context, message } => {
            format_err(format!("{}: {context}", path.display()), message)
        }
        other => other,
    })
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(default)]
    num_qubits: Option<usize>,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    kind: Option<String>,
}

/// 1-based line of the `idx`-th entry of the `"edges"` array.
fn edge_line(text: &str, idx: usize) -> usize {
    let Some(start) = text.find("\"edges\"") else {
        return 1;
    };
    let mut depth = 0usize;
    let mut count = 0usize;
    let mut pos = start;
    for (off, ch) in text[start..].char_indices() {
        match ch {
            '[' => {
                depth += 1;
                if depth == 2 {
                    if count == idx {
                        pos = start + off;
                        break;
                    }
                    count += 1;
                }
            }
            ']' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    text[..pos].matches('\n').count() + 1
}

/// Chimera `C_m`: an `m x m` grid of `K_{4,4}` cells.
///
/// Qubit `(i, j, u, k)` has index `((i * m + j) * 2 + u) * 4 + k`. Vertical
/// qubits (`u = 0`) couple to the cell below, horizontal ones to the cell on
/// the right.
pub fn gen_chimera(m: usize) -> Result<HardwareGraph> {
    if m == 0 {
        return Err(arg("chimera size must be at least 1"));
    }
    const T: usize = 4;
    let idx = |i: usize, j: usize, u: usize, k: usize| ((i * m + j) * 2 + u) * T + k;
    let mut edges = Vec::with_capacity(16 * m * m + 8 * m * (m - 1));
    for i in 0..m {
        for j in 0..m {
            for k in 0..T {
                for kk in 0..T {
                    edges.push((idx(i, j, 0, k), idx(i, j, 1, kk)));
                }
                if i + 1 < m {
                    edges.push((idx(i, j, 0, k), idx(i + 1, j, 0, k)));
                }
                if j + 1 < m {
                    edges.push((idx(i, j, 1, k), idx(i, j + 1, 1, k)));
                }
            }
        }
    }
    let mut g = HardwareGraph::new(8 * m * m, edges, GraphKind::Chimera(m))?;
    g.coordinates = Some(
        (0..g.num_qubits)
            .map(|q| vec![q / (2 * T * m), (q / (2 * T)) % m, (q / T) % 2, q % T])
            .collect(),
    );
    Ok(g)
}

/// Ideal Pegasus `P_m` with all `24 m (m - 1)` qubits.
///
/// Qubit `(u, w, k, z)` has index `((u * m + w) * 12 + k) * (m - 1) + z`.
/// Edges are the external (`z ~ z + 1`), odd (`2k ~ 2k + 1`) and internal
/// (vertical ~ horizontal, shifted by the standard tile offsets) couplers.
pub fn gen_pegasus(m: usize) -> Result<HardwareGraph> {
    if m < 2 {
        return Err(arg(format!("pegasus size must be at least 2, got {m}")));
    }
    let m1 = m - 1;
    let idx = |u: usize, w: usize, k: usize, z: usize| ((u * m + w) * 12 + k) * m1 + z;
    let mut edges = Vec::new();
    for u in 0..2 {
        for w in 0..m {
            for k in 0..12 {
                for z in 0..m1 {
                    if z + 1 < m1 {
                        edges.push((idx(u, w, k, z), idx(u, w, k, z + 1)));
                    }
                    if k % 2 == 0 {
                        edges.push((idx(u, w, k, z), idx(u, w, k + 1, z)));
                    }
                }
            }
        }
    }
    let (off_v, off_h) = (PEGASUS_VERTICAL_OFFSETS, PEGASUS_HORIZONTAL_OFFSETS);
    for w in 0..m {
        for kk in 0..12 {
            for k in 0..12 {
                for z in 0..m1 {
                    // horizontal partner (1, w1, kk, z1)
                    let w1 = z + usize::from(kk < off_v[k]);
                    let shift = usize::from(k < off_h[kk]);
                    if w < shift {
                        continue;
                    }
                    let z1 = w - shift;
                    if z1 >= m1 {
                        continue;
                    }
                    edges.push((idx(0, w, k, z), idx(1, w1, kk, z1)));
                }
            }
        }
    }
    let n = 24 * m * m1;
    let mut g = HardwareGraph::new(n, edges, GraphKind::Pegasus(m))?;
    g.coordinates = Some(
        (0..n)
            .map(|q| {
                let z = q % m1;
                let k = (q / m1) % 12;
                let w = (q / (12 * m1)) % m;
                let u = q / (12 * m1 * m);
                vec![u, w, k, z]
            })
            .collect(),
    );
    Ok(g)
}
