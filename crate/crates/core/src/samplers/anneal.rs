//! Metropolis simulated annealing on a geometric inverse-temperature ladder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Read, SampleSet, Sampler, SamplerInfo};
use crate::error::{arg, Result};
use crate::model::{Configuration, IsingProblem, Spin};

pub const DEFAULT_SWEEPS: usize = 1000;
pub const DEFAULT_BETA_RANGE: (f64, f64) = (0.1, 10.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulatedAnnealing {
    pub sweeps: usize,
    pub beta_range: (f64, f64),
}

impl Default for SimulatedAnnealing {
    fn default() -> Self {
        Self {
            sweeps: DEFAULT_SWEEPS,
            beta_range: DEFAULT_BETA_RANGE,
        }
    }
}

impl SimulatedAnnealing {
    pub const KIND: &'static str = "simulated_annealing";

    pub fn new(sweeps: usize, beta_range: (f64, f64)) -> Result<Self> {
        let sa = Self { sweeps, beta_range };
        sa.check()?;
        Ok(sa)
    }

    fn check(&self) -> Result<()> {
        let (lo, hi) = self.beta_range;
        if self.sweeps == 0 {
            return Err(arg("sweeps must be at least 1"));
        }
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(arg(format!("need 0 < beta_min < beta_max, got ({lo}, {hi})")));
        }
        Ok(())
    }

    fn schedule(&self) -> Vec<f64> {
        let (lo, hi) = self.beta_range;
        if self.sweeps == 1 {
            return vec![hi];
        }
        let ratio = (hi / lo).ln() / (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|k| lo * (ratio * k as f64).exp())
            .collect()
    }
}

impl Sampler for SimulatedAnnealing {
    fn sample(&self, problem: &IsingProblem, num_reads: usize, seed: u64) -> Result<SampleSet> {
        self.check()?;
        if num_reads == 0 {
            return Err(arg("num_reads must be at least 1"));
        }
        let betas = self.schedule();
        let lattice = Lattice::new(problem);
        let reads: Vec<Read> = (0..num_reads)
            .into_par_iter()
            .map(|r| {
                // each read owns a stream, so results ignore scheduling
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let spins = lattice.anneal(&betas, &mut rng);
                let energy = problem.energy_unchecked(&spins);
                Read {
                    config: Configuration::new(spins).expect("annealer emits +-1"),
                    energy,
                    occurrences: 1,
                }
            })
            .collect();
        Ok(SampleSet {
            reads,
            info: SamplerInfo {
                kind: Self::KIND.to_string(),
                num_reads,
                sweeps: Some(self.sweeps),
                schedule: format!(
                    "geometric beta {} -> {}",
                    self.beta_range.0, self.beta_range.1
                ),
                seed,
            },
            problem_ref: problem.label().to_string(),
        })
    }
}

/// Simulated annealing with `num_reads` independent anneals.
pub fn sa_sample(
    problem: &IsingProblem,
    num_reads: usize,
    sweeps: usize,
    beta_range: (f64, f64),
    seed: u64,
) -> Result<SampleSet> {
    SimulatedAnnealing::new(sweeps, beta_range)?.sample(problem, num_reads, seed)
}

/// Compressed adjacency for the inner loop.
struct Lattice {
    fields: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<usize>,
    coupling: Vec<f64>,
}

impl Lattice {
    fn new(problem: &IsingProblem) -> Self {
        let adj = problem.adjacency();
        let mut start = Vec::with_capacity(adj.len() + 1);
        let mut nbr = Vec::new();
        let mut coupling = Vec::new();
        start.push(0);
        for row in &adj {
            for &(j, v) in row {
                if v != 0.0 {
                    nbr.push(j);
                    coupling.push(v);
                }
            }
            start.push(nbr.len());
        }
        Self {
            fields: problem.fields().to_vec(),
            start,
            nbr,
            coupling,
        }
    }

    fn anneal(&self, betas: &[f64], rng: &mut ChaCha8Rng) -> Vec<Spin> {
        let n = self.fields.len();
        let mut spins: Vec<Spin> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut local = self.fields.clone();
        for i in 0..n {
            for k in self.start[i]..self.start[i + 1] {
                local[i] += self.coupling[k] * f64::from(spins[self.nbr[k]]);
            }
        }
        for &beta in betas {
            for i in 0..n {
                let s = f64::from(spins[i]);
                let delta = -2.0 * s * local[i];
                if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                    spins[i] = -spins[i];
                    for k in self.start[i]..self.start[i + 1] {
                        local[self.nbr[k]] -= 2.0 * self.coupling[k] * s;
                    }
                }
            }
        }
        spins
    }
}
