//! Logical Ising problems.
//!
//! Every problem in this crate is stored in minimization form:
//!
//! ```text
//! E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i,   s_i in {-1, +1}
//! ```
//!
//! so a negative coupler is ferromagnetic. The generators below translate the
//! usual physics conventions (`-J1 sum s s`, `-sum J s s`) into this form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, format_err, read_file, write_file, Error, Result};

pub type Spin = i8;

/// The `convention` header written into every problem file.
pub const ENERGY_CONVENTION: &str = "sum J s s + sum h s";

/// A vector of `+1`/`-1` spins.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Configuration(Vec<Spin>);

impl Configuration {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(arg(format!(
                "spin {pos} has value {}, expected +1 or -1",
                spins[pos]
            )));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Spin `i` is `-1` iff bit `i` of `bits` is set.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self((0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn spins(&self) -> &[Spin] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Spin> {
        self.0
    }
}

impl std::ops::Deref for Configuration {
    type Target = [Spin];

    fn deref(&self) -> &[Spin] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let spins = Vec::<Spin>::deserialize(d)?;
        Configuration::new(spins).map_err(serde::de::Error::custom)
    }
}

/// Linear fields and pairwise couplers over `num_vars` spins.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingProblem {
    num_vars: usize,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    label: String,
}

impl IsingProblem {
    /// Builds a problem, normalizing each pair to `i < j`.
    ///
    /// Rejects out-of-range indices, self couplers, duplicate entries and
    /// non-finite values.
    pub fn new(
        num_vars: usize,
        linear: impl IntoIterator<Item = (usize, f64)>,
        quadratic: impl IntoIterator<Item = (usize, usize, f64)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut fields = vec![0.0; num_vars];
        let mut seen = vec![false; num_vars];
        for (i, h) in linear {
            if i >= num_vars {
                return Err(arg(format!("field index {i} out of range for {num_vars} vars")));
            }
            if !h.is_finite() {
                return Err(arg(format!("field on {i} is not finite")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(arg(format!("duplicate field on {i}")));
            }
            fields[i] = h;
        }
        let mut couplers = BTreeMap::new();
        for (a, b, j) in quadratic {
            if a >= num_vars || b >= num_vars {
                return Err(arg(format!("coupler ({a}, {b}) out of range for {num_vars} vars")));
            }
            if a == b {
                return Err(arg(format!("self coupler on {a}")));
            }
            if !j.is_finite() {
                return Err(arg(format!("coupler ({a}, {b}) is not finite")));
            }
            let key = (a.min(b), a.max(b));
            if couplers.insert(key, j).is_some() {
                return Err(arg(format!("duplicate coupler ({}, {})", key.0, key.1)));
            }
        }
        Ok(Self {
            num_vars,
            linear: fields,
            quadratic: couplers,
            label: label.into(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn field(&self, i: usize) -> f64 {
        self.linear[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.linear
    }

    pub fn coupler(&self, i: usize, j: usize) -> Option<f64> {
        self.quadratic.get(&(i.min(j), i.max(j))).copied()
    }

    /// Couplers in ascending `(i, j)` order, explicit zeros included.
    pub fn couplers(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.quadratic.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn num_couplers(&self) -> usize {
        self.quadratic.len()
    }

    pub fn has_fields(&self) -> bool {
        self.linear.iter().any(|&h| h != 0.0)
    }

    /// Number of couplers touching each variable (explicit zeros count).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vars];
        for &(i, j) in self.quadratic.keys() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Sorted neighbor lists with coupler values.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vars];
        for (&(i, j), &v) in &self.quadratic {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        for row in &mut adj {
            row.sort_by_key(|&(n, _)| n);
        }
        adj
    }

    pub fn energy(&self, spins: &[Spin]) -> Result<f64> {
        if spins.len() != self.num_vars {
            return Err(arg(format!(
                "configuration has {} spins, problem has {} vars",
                spins.len(),
                self.num_vars
            )));
        }
        Ok(self.energy_unchecked(spins))
    }

    /// Energy without the length check. Panics on a short slice.
    pub fn energy_unchecked(&self, spins: &[Spin]) -> f64 {
        let mut e = 0.0;
        for (&(i, j), &v) in &self.quadratic {
            e += v * f64::from(spins[i] * spins[j]);
        }
        for (h, &s) in self.linear.iter().zip(spins) {
            e += h * f64::from(s);
        }
        e
    }

    pub fn to_json(&self) -> Result<String> {
        crate::jsonfmt::to_string_rows(&ProblemFile::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| format_err("problem json", e.to_string()))?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&read_file(path)?).map_err(|e| match e {
            Error::Format { message, .. } => format_err(path.display().to_string(), message),
            other => other,
        })
    }
}

impl fmt::Display for IsingProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} vars, {} couplers)",
            if self.label.is_empty() { "ising" } else { &self.label },
            self.num_vars,
            self.quadratic.len()
        )
    }
}

/// On-disk problem layout.
#[derive(Serialize, Deserialize)]
pub(crate) struct ProblemFile {
    #[serde(default = "default_convention")]
    pub convention: String,
    pub num_vars: usize,
    #[serde(default)]
    pub linear: Vec<(usize, f64)>,
    #[serde(default)]
    pub quadratic: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub label: String,
}

fn default_convention() -> String {
    ENERGY_CONVENTION.to_string()
}

impl From<&IsingProblem> for ProblemFile {
    fn from(p: &IsingProblem) -> Self {
        Self {
            convention: ENERGY_CONVENTION.to_string(),
            num_vars: p.num_vars,
            linear: p
                .linear
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(i, &h)| (i, h))
                .collect(),
            quadratic: p.couplers().collect(),
            label: p.label.clone(),
        }
    }
}

impl TryFrom<ProblemFile> for IsingProblem {
    type Error = Error;

    fn try_from(f: ProblemFile) -> Result<Self> {
        if f.convention != ENERGY_CONVENTION {
            return Err(format_err(
                "problem json",
                format!("unsupported convention {:?}", f.convention),
            ));
        }
        IsingProblem::new(f.num_vars, f.linear, f.quadratic, f.label)
            .map_err(|e| format_err("problem json", e.to_string()))
    }
}

/// Site index of `(row, col)` on an `l x l` lattice.
pub fn lattice_site(l: usize, row: usize, col: usize) -> usize {
    row * l + col
}

/// J1-J2 model on an open `l x l` square lattice.
///
/// Nearest-neighbor bonds get `-j1` (ferromagnetic) and both diagonals of
/// every plaquette get `+j2` (antiferromagnetic).
pub fn gen_j1j2(l: usize, j1: f64, j2: f64) -> Result<IsingProblem> {
    if l < 2 {
        return Err(arg(format!("lattice size must be at least 2, got {l}")));
    }
    if !(j1 > 0.0) || !j2.is_finite() {
        return Err(arg(format!("need j1 > 0 and finite j2, got j1={j1} j2={j2}")));
    }
    let site = |r, c| lattice_site(l, r, c);
    let mut bonds = Vec::with_capacity(2 * l * (l - 1) + 2 * (l - 1) * (l - 1));
    for r in 0..l {
        for c in 0..l {
            if c + 1 < l {
                bonds.push((site(r, c), site(r, c + 1), -j1));
            }
            if r + 1 < l {
                bonds.push((site(r, c), site(r + 1, c), -j1));
            }
            if r + 1 < l && c + 1 < l {
                bonds.push((site(r, c), site(r + 1, c + 1), j2));
                bonds.push((site(r, c + 1), site(r + 1, c), j2));
            }
        }
    }
    IsingProblem::new(l * l, [], bonds, format!("j1j2 L={l} J1={j1} J2={j2}"))
}

/// Fully connected instance with every coupler drawn uniformly from
/// `{-1, 0, +1}`. Zero draws stay in the problem as explicit couplers.
pub fn gen_fully_connected(n: usize, seed: u64) -> Result<IsingProblem> {
    if n < 2 {
        return Err(arg(format!("fully connected instance needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut couplers = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            // physics sign -J s s, so a drawn +1 is stored as -1
            let internal = match rng.gen_range(0..3u8) {
                0 => 1.0,
                1 => 0.0,
                _ => -1.0,
            };
            couplers.push((i, j, internal));
        }
    }
    IsingProblem::new(n, [], couplers, format!("fully_connected N={n} seed={seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_levels(p: &IsingProblem) -> Vec<f64> {
        let n = p.num_vars();
        let mut es: Vec<f64> = (0..1u64 << n)
            .map(|b| p.energy_unchecked(&Configuration::from_bits(b, n)))
            .collect();
        es.sort_by(f64::total_cmp);
        es
    }

    #[test]
    fn plaquette_all_up_is_ground() {
        let p = gen_j1j2(2, 1.0, 0.42).unwrap();
        let e = p.energy(&[1, 1, 1, 1]).unwrap();
        assert!((e + 3.16).abs() < 1e-12);
        let levels = brute_force_levels(&p);
        assert!((levels[0] - e).abs() < 1e-12);
    }

    #[test]
    fn single_coupler() {
        let p = IsingProblem::new(2, [], [(0, 1, 1.0)], "").unwrap();
        assert_eq!(p.energy(&[1, 1]).unwrap(), 1.0);
        assert_eq!(p.energy(&[1, -1]).unwrap(), -1.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let p = gen_j1j2(2, 1.0, 0.42).unwrap();
        assert!(matches!(p.energy(&[1, 1, 1]), Err(Error::Argument(_))));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(IsingProblem::new(2, [], [(0, 0, 1.0)], "").is_err());
        assert!(IsingProblem::new(2, [], [(0, 2, 1.0)], "").is_err());
        assert!(IsingProblem::new(2, [], [(0, 1, 1.0), (1, 0, 2.0)], "").is_err());
        assert!(IsingProblem::new(2, [(0, f64::NAN)], [], "").is_err());
        assert!(IsingProblem::new(2, [(0, 1.0), (0, 2.0)], [], "").is_err());
        let p = IsingProblem::new(3, [], [(2, 0, -1.0)], "").unwrap();
        assert_eq!(p.couplers().collect::<Vec<_>>(), vec![(0, 2, -1.0)]);
    }

    #[test]
    fn j1j2_plaquette_bonds() {
        let p = gen_j1j2(2, 1.0, 0.42).unwrap();
        assert_eq!(p.num_vars(), 4);
        let nn = p.couplers().filter(|c| c.2 == -1.0).count();
        let diag = p.couplers().filter(|c| c.2 == 0.42).count();
        assert_eq!((nn, diag), (4, 2));
        assert_eq!(p.coupler(0, 3), Some(0.42));
        assert_eq!(p.coupler(1, 2), Some(0.42));
    }

    #[test]
    fn j1j2_bond_counts_match_closed_form() {
        for l in 2..=10 {
            let p = gen_j1j2(l, 1.0, 0.3).unwrap();
            let nn = p.couplers().filter(|c| c.2 == -1.0).count();
            let diag = p.couplers().filter(|c| c.2 == 0.3).count();
            assert_eq!(nn, 2 * l * (l - 1), "L={l}");
            assert_eq!(diag, 2 * (l - 1) * (l - 1), "L={l}");
        }
        let p = gen_j1j2(8, 1.0, 0.42).unwrap();
        assert_eq!((p.num_vars(), p.num_couplers()), (64, 210));
    }

    #[test]
    fn j1j2_rejects_small_lattice() {
        assert!(gen_j1j2(1, 1.0, 0.4).is_err());
        assert!(gen_j1j2(3, 0.0, 0.4).is_err());
    }

    #[test]
    fn fully_connected_shape_and_determinism() {
        let p = gen_fully_connected(4, 9).unwrap();
        assert_eq!(p.num_couplers(), 6);
        assert!(p.couplers().all(|(_, _, v)| [-1.0, 0.0, 1.0].contains(&v)));
        assert_eq!(gen_fully_connected(20, 3).unwrap().num_couplers(), 190);
        let a = gen_fully_connected(12, 77).unwrap();
        let b = gen_fully_connected(12, 77).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_ne!(a, gen_fully_connected(12, 78).unwrap());
        assert!(gen_fully_connected(1, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_header() {
        let p = IsingProblem::new(3, [(1, 0.5)], [(0, 1, -1.0), (1, 2, 0.0)], "tiny").unwrap();
        let text = p.to_json().unwrap();
        assert!(text.contains(ENERGY_CONVENTION));
        assert_eq!(IsingProblem::from_json(&text).unwrap(), p);
        let bad = text.replace(ENERGY_CONVENTION, "sum -J s s");
        assert!(IsingProblem::from_json(&bad).is_err());
    }

    #[test]
    fn configuration_rejects_zero() {
        assert!(Configuration::new(vec![1, 0]).is_err());
        assert_eq!(Configuration::from_bits(0b10, 3).spins(), &[1, -1, 1]);
    }

    proptest::proptest! {
        #[test]
        fn spin_flip_symmetry(seed in 0u64..1000, n in 2usize..12, bits in proptest::prelude::any::<u64>()) {
            let p = gen_fully_connected(n, seed).unwrap();
            let s = Configuration::from_bits(bits, n);
            let e = p.energy(&s).unwrap();
            proptest::prop_assert_eq!(e, p.energy(&s.flipped()).unwrap());
        }

        #[test]
        fn generator_is_deterministic(seed in proptest::prelude::any::<u64>(), n in 2usize..16) {
            let a = gen_fully_connected(n, seed).unwrap().to_json().unwrap();
            let b = gen_fully_connected(n, seed).unwrap().to_json().unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
