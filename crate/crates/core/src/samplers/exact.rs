//! Exhaustive enumeration of all `2^n` spin states.
//!
//! The state space is cut into blocks by fixing the high spins. Each block
//! is walked in reflected Gray-code order so every step flips a single spin
//! and the energy is updated in O(degree) from maintained local fields. The
//! running energy is only a filter: any state that may belong to the two
//! lowest levels is re-evaluated from scratch, so reported energies are
//! exactly what [`IsingProblem::energy`] returns.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Configuration, IsingProblem};

/// Largest problem the enumerator accepts.
pub const MAX_EXACT_SPINS: usize = 28;

/// Energies closer than this are one level.
pub const LEVEL_TOLERANCE: f64 = 1e-12;

/// Ground configurations kept in a summary; the degeneracy count is exact
/// regardless.
pub const MAX_STORED_GROUND_STATES: usize = 4096;

/// Slack on the incremental energy before a state is re-evaluated. Far
/// above the drift of a single block walk.
const FILTER_SLACK: f64 = 1e-6;

/// Spins enumerated inside one block.
const BLOCK_BITS: usize = 16;

/// Two lowest levels of a problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub num_vars: usize,
    pub ground_energy: f64,
    pub ground_degeneracy: u64,
    /// Ground configurations in ascending bit order (spin `i` is `-1` iff
    /// bit `i` is set), at most [`MAX_STORED_GROUND_STATES`] of them.
    #[serde(skip)]
    pub ground_states: Vec<Configuration>,
    /// Lowest energy strictly above the ground level, if any.
    pub first_excited_energy: Option<f64>,
    pub excited_degeneracy: u64,
    /// States with energy below the requested cutoff.
    pub states_below_cutoff: Option<u64>,
}

impl SpectrumSummary {
    /// Gap between the first excited level and the ground level.
    pub fn gap(&self) -> Option<f64> {
        self.first_excited_energy.map(|e| e - self.ground_energy)
    }

    pub fn ground_states_truncated(&self) -> bool {
        (self.ground_states.len() as u64) < self.ground_degeneracy
    }
}

/// Exact ground level, ground states and first excited level.
pub fn exact_spectrum(problem: &IsingProblem, energy_cutoff: Option<f64>) -> Result<SpectrumSummary> {
    exact_spectrum_classified(problem, energy_cutoff, |_| false).map(|(s, _)| s)
}

/// As [`exact_spectrum`], also counting the ground states for which
/// `flag(bits)` holds.
pub fn exact_spectrum_classified<F>(
    problem: &IsingProblem,
    energy_cutoff: Option<f64>,
    flag: F,
) -> Result<(SpectrumSummary, u64)>
where
    F: Fn(u64) -> bool + Sync,
{
    let n = problem.num_vars();
    if n > MAX_EXACT_SPINS {
        return Err(Error::TooLarge {
            what: "exact enumeration",
            needed: n,
            cap: MAX_EXACT_SPINS,
        });
    }
    let walker = Walker::new(problem);
    let low = n.min(BLOCK_BITS);
    let blocks = 1u64 << (n - low);
    let levels = (0..blocks)
        .into_par_iter()
        .map(|prefix| walker.walk_block(prefix, low, energy_cutoff, &flag))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(Levels::merge)
        .expect("at least one block");

    let ground = levels.ground.expect("at least one state");
    let mut states = ground.states;
    states.sort_unstable();
    let summary = SpectrumSummary {
        num_vars: n,
        ground_energy: ground.energy,
        ground_degeneracy: ground.count,
        ground_states: states.into_iter().map(|b| Configuration::from_bits(b, n)).collect(),
        first_excited_energy: levels.excited.map(|(e, _)| e),
        excited_degeneracy: levels.excited.map_or(0, |(_, c)| c),
        states_below_cutoff: energy_cutoff.map(|_| levels.below_cutoff),
    };
    Ok((summary, ground.flagged))
}

struct Walker {
    n: usize,
    fields: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<usize>,
    coupling: Vec<f64>,
    pairs: Vec<(usize, usize, f64)>,
}

impl Walker {
    fn new(problem: &IsingProblem) -> Self {
        let adj = problem.adjacency();
        let mut start = vec![0];
        let mut nbr = Vec::new();
        let mut coupling = Vec::new();
        for row in &adj {
            for &(j, v) in row {
                nbr.push(j);
                coupling.push(v);
            }
            start.push(nbr.len());
        }
        Self {
            n: problem.num_vars(),
            fields: problem.fields().to_vec(),
            start,
            nbr,
            coupling,
            pairs: problem.couplers().collect(),
        }
    }

    /// Same summation order as `IsingProblem::energy_unchecked`.
    fn exact_energy(&self, bits: u64) -> f64 {
        let spin = |i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for &(i, j, v) in &self.pairs {
            let s: i8 = if (bits >> i ^ bits >> j) & 1 == 1 { -1 } else { 1 };
            e += v * f64::from(s);
        }
        for (i, h) in self.fields.iter().enumerate() {
            e += h * spin(i);
        }
        e
    }

    fn walk_block<F: Fn(u64) -> bool>(
        &self,
        prefix: u64,
        low: usize,
        cutoff: Option<f64>,
        flag: &F,
    ) -> Levels {
        let mut bits = prefix << low;
        let mut spins: Vec<f64> = (0..self.n)
            .map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let mut local = self.fields.clone();
        for i in 0..self.n {
            for k in self.start[i]..self.start[i + 1] {
                local[i] += self.coupling[k] * spins[self.nbr[k]];
            }
        }
        let mut energy = self.exact_energy(bits);
        let mut levels = Levels::default();
        let visit = |bits: u64, approx: f64, levels: &mut Levels| {
            let mut exact = None;
            if let Some(c) = cutoff {
                let below = if (approx - c).abs() < FILTER_SLACK {
                    *exact.get_or_insert_with(|| self.exact_energy(bits)) < c
                } else {
                    approx < c
                };
                levels.below_cutoff += u64::from(below);
            }
            let candidate = match (&levels.ground, levels.excited) {
                (Some(_), Some((e1, _))) => approx <= e1 + FILTER_SLACK,
                _ => true,
            };
            if candidate {
                let e = exact.unwrap_or_else(|| self.exact_energy(bits));
                levels.insert(e, 1, &[bits], u64::from(flag(bits)));
            }
        };
        visit(bits, energy, &mut levels);
        for t in 1u64..1u64 << low {
            let i = t.trailing_zeros() as usize;
            let s = spins[i];
            energy -= 2.0 * s * local[i];
            spins[i] = -s;
            bits ^= 1 << i;
            for k in self.start[i]..self.start[i + 1] {
                local[self.nbr[k]] -= 2.0 * self.coupling[k] * s;
            }
            visit(bits, energy, &mut levels);
        }
        levels
    }
}

struct GroundLevel {
    energy: f64,
    count: u64,
    states: Vec<u64>,
    flagged: u64,
}

#[derive(Default)]
struct Levels {
    ground: Option<GroundLevel>,
    excited: Option<(f64, u64)>,
    below_cutoff: u64,
}

impl Levels {
    fn insert(&mut self, energy: f64, count: u64, states: &[u64], flagged: u64) {
        let Some(g) = &mut self.ground else {
            self.ground = Some(GroundLevel {
                energy,
                count,
                states: states.iter().copied().take(MAX_STORED_GROUND_STATES).collect(),
                flagged,
            });
            return;
        };
        if energy < g.energy - LEVEL_TOLERANCE {
            let old = self.ground.replace(GroundLevel {
                energy,
                count,
                states: states.iter().copied().take(MAX_STORED_GROUND_STATES).collect(),
                flagged,
            });
            let old = old.expect("ground was set");
            self.excited = Some((old.energy, old.count));
        } else if energy <= g.energy + LEVEL_TOLERANCE {
            g.energy = g.energy.min(energy);
            g.count += count;
            g.flagged += flagged;
            let room = MAX_STORED_GROUND_STATES.saturating_sub(g.states.len());
            g.states.extend(states.iter().copied().take(room));
        } else {
            self.insert_excited(energy, count);
        }
    }

    fn insert_excited(&mut self, energy: f64, count: u64) {
        match &mut self.excited {
            None => self.excited = Some((energy, count)),
            Some((e, c)) => {
                if energy < *e - LEVEL_TOLERANCE {
                    *e = energy;
                    *c = count;
                } else if energy <= *e + LEVEL_TOLERANCE {
                    *e = e.min(energy);
                    *c += count;
                }
            }
        }
    }

    fn merge(mut self, other: Levels) -> Levels {
        self.below_cutoff += other.below_cutoff;
        if let Some(g) = other.ground {
            self.insert(g.energy, g.count, &g.states, g.flagged);
        }
        if let Some((e, c)) = other.excited {
            self.insert(e, c, &[], 0);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_fully_connected, gen_j1j2};

    #[test]
    fn plaquette_levels() {
        let p = gen_j1j2(2, 1.0, 0.42).unwrap();
        let s = exact_spectrum(&p, None).unwrap();
        assert!((s.ground_energy + 3.16).abs() < 1e-12);
        assert_eq!(s.ground_degeneracy, 2);
        assert!((s.first_excited_energy.unwrap() + 0.84).abs() < 1e-12);
        assert_eq!(s.excited_degeneracy, 4);
        assert!((s.gap().unwrap() - 2.32).abs() < 1e-12);
        assert_eq!(
            s.ground_states,
            vec![Configuration::all_up(4), Configuration::all_up(4).flipped()]
        );
    }

    #[test]
    fn single_free_spin() {
        let p = IsingProblem::new(1, [(0, 1.0)], [], "").unwrap();
        let s = exact_spectrum(&p, Some(0.0)).unwrap();
        assert_eq!(s.ground_energy, -1.0);
        assert_eq!(s.ground_states[0].spins(), &[-1]);
        assert_eq!(s.first_excited_energy, Some(1.0));
        assert_eq!(s.gap(), Some(2.0));
        assert_eq!(s.states_below_cutoff, Some(1));
    }

    #[test]
    fn zero_field_degeneracy_is_even() {
        for seed in 0..10 {
            let p = gen_fully_connected(9, seed).unwrap();
            let s = exact_spectrum(&p, None).unwrap();
            assert_eq!(s.ground_degeneracy % 2, 0);
        }
    }

    #[test]
    fn flat_problem_has_no_excited_level() {
        let p = IsingProblem::new(3, [], [(0, 1, 0.0)], "").unwrap();
        let s = exact_spectrum(&p, None).unwrap();
        assert_eq!((s.ground_degeneracy, s.first_excited_energy), (8, None));
    }

    #[test]
    fn refuses_oversized_problems() {
        let p = IsingProblem::new(29, [], [], "").unwrap();
        assert!(matches!(exact_spectrum(&p, None), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn multi_block_walk_matches_brute_force() {
        // 18 spins forces 4 blocks
        let p = gen_fully_connected(18, 12).unwrap();
        let s = exact_spectrum(&p, Some(-20.0)).unwrap();
        let mut energies: Vec<f64> = (0..1u64 << 18)
            .map(|b| p.energy_unchecked(&Configuration::from_bits(b, 18)))
            .collect();
        let below = energies.iter().filter(|&&e| e < -20.0).count() as u64;
        energies.sort_by(f64::total_cmp);
        assert_eq!(s.ground_energy, energies[0]);
        let deg = energies.iter().filter(|&&e| e == energies[0]).count() as u64;
        assert_eq!(s.ground_degeneracy, deg);
        assert_eq!(s.first_excited_energy, Some(energies[deg as usize]));
        assert_eq!(s.states_below_cutoff, Some(below));
    }

    #[test]
    fn classifier_counts_flagged_ground_states() {
        let p = gen_j1j2(2, 1.0, 0.42).unwrap();
        let (_, flagged) = exact_spectrum_classified(&p, None, |b| b == 0).unwrap();
        assert_eq!(flagged, 1);
    }

    #[test]
    fn thread_count_independent() {
        let p = gen_fully_connected(20, 3).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| exact_spectrum(&p, None).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
