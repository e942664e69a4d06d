//! Energy-state explorers: exhaustive enumeration and a seeded simulated
//! annealer that stands in for hardware annealing shots.

mod anneal;
mod exact;

pub use anneal::{sa_sample, SimulatedAnnealing, DEFAULT_BETA_RANGE, DEFAULT_SWEEPS};
pub use exact::{
    exact_spectrum, exact_spectrum_classified, SpectrumSummary, LEVEL_TOLERANCE,
    MAX_EXACT_SPINS, MAX_STORED_GROUND_STATES,
};

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{format_err, read_file, write_file, Result};
use crate::model::{Configuration, IsingProblem};

/// Anything that turns a problem into reads.
pub trait Sampler: Sync {
    fn sample(&self, problem: &IsingProblem, num_reads: usize, seed: u64) -> Result<SampleSet>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerInfo {
    /// Which sampler produced the reads; never a hardware name.
    pub kind: String,
    pub num_reads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    pub schedule: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Read {
    pub config: Configuration,
    pub energy: f64,
    pub occurrences: usize,
}

/// Reads from one sampler call.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub reads: Vec<Read>,
    pub info: SamplerInfo,
    pub problem_ref: String,
}

#[derive(Serialize, Deserialize)]
struct SampleSetFile {
    sampler: SamplerInfo,
    #[serde(default)]
    problem: String,
    reads: Vec<(Configuration, f64, usize)>,
}

impl SampleSet {
    pub fn total_reads(&self) -> usize {
        self.reads.iter().map(|r| r.occurrences).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_reads() == 0
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.reads
            .iter()
            .filter(|r| r.occurrences > 0)
            .map(|r| r.energy)
            .min_by(f64::total_cmp)
    }

    /// Merges identical configurations, keeping first-appearance order.
    pub fn aggregated(&self) -> SampleSet {
        let mut index: HashMap<&Configuration, usize> = HashMap::new();
        let mut reads: Vec<Read> = Vec::new();
        for r in &self.reads {
            match index.get(&r.config) {
                Some(&i) => reads[i].occurrences += r.occurrences,
                None => {
                    index.insert(&r.config, reads.len());
                    reads.push(r.clone());
                }
            }
        }
        SampleSet {
            reads,
            info: self.info.clone(),
            problem_ref: self.problem_ref.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = SampleSetFile {
            sampler: self.info.clone(),
            problem: self.problem_ref.clone(),
            reads: self
                .reads
                .iter()
                .map(|r| (r.config.clone(), r.energy, r.occurrences))
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SampleSetFile =
            serde_json::from_str(text).map_err(|e| format_err("sample set json", e.to_string()))?;
        Ok(SampleSet {
            reads: file
                .reads
                .into_iter()
                .map(|(config, energy, occurrences)| Read {
                    config,
                    energy,
                    occurrences,
                })
                .collect(),
            info: file.sampler,
            problem_ref: file.problem,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_file(path.as_ref())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(energies: &[(i8, f64)]) -> SampleSet {
        SampleSet {
            reads: energies
                .iter()
                .map(|&(s, e)| Read {
                    config: Configuration::new(vec![s]).unwrap(),
                    energy: e,
                    occurrences: 1,
                })
                .collect(),
            info: SamplerInfo {
                kind: "test".into(),
                num_reads: energies.len(),
                sweeps: None,
                schedule: String::new(),
                seed: 0,
            },
            problem_ref: "p".into(),
        }
    }

    #[test]
    fn aggregation_keeps_totals() {
        let s = set(&[(1, 1.0), (-1, -1.0), (1, 1.0)]);
        let a = s.aggregated();
        assert_eq!(a.reads.len(), 2);
        assert_eq!(a.reads[0].occurrences, 2);
        assert_eq!(a.total_reads(), 3);
        assert_eq!(a.min_energy(), Some(-1.0));
    }

    #[test]
    fn json_round_trip() {
        let s = set(&[(1, 1.0), (-1, -1.0)]);
        assert_eq!(SampleSet::from_json(&s.to_json().unwrap()).unwrap(), s);
        let bad = s.to_json().unwrap().replace("[-1]", "[0]");
        assert!(SampleSet::from_json(&bad).is_err());
    }
}
