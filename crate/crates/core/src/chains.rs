//! Chain-break detection, unembedding and success probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::Embedding;
use crate::error::{arg, Result};
use crate::model::{Configuration, IsingProblem, Spin};
use crate::samplers::{Read, SampleSet};

/// Absolute tolerance for matching a read to the reference energy.
pub const GROUND_MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReadBreaks {
    pub broken_chains: Vec<usize>,
    pub broken_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub per_read: Vec<ReadBreaks>,
    /// Occurrence-weighted mean of the per-read broken fractions.
    pub aggregate_broken_fraction: f64,
    /// Occurrence-weighted fraction of reads with at least one break.
    pub broken_read_fraction: f64,
}

impl ChainReport {
    pub fn any_broken(&self) -> bool {
        self.per_read.iter().any(|r| !r.broken_chains.is_empty())
    }
}

fn check_qubits(samples: &SampleSet, embedding: &Embedding) -> Result<()> {
    let Some(width) = samples.reads.first().map(|r| r.config.len()) else {
        return Ok(());
    };
    if samples.reads.iter().any(|r| r.config.len() != width) {
        return Err(arg("reads have different lengths"));
    }
    for (v, chain) in embedding.chains() {
        if let Some(&q) = chain.iter().find(|&&q| q >= width) {
            return Err(arg(format!(
                "chain of {v} uses qubit {q} but reads have {width} spins"
            )));
        }
    }
    Ok(())
}

fn is_broken(spins: &[Spin], chain: &[usize]) -> bool {
    chain.split_first().is_some_and(|(&first, rest)| {
        rest.iter().any(|&q| spins[q] != spins[first])
    })
}

/// A chain is broken in a read iff its qubits disagree.
pub fn detect_breaks(samples: &SampleSet, embedding: &Embedding) -> Result<ChainReport> {
    check_qubits(samples, embedding)?;
    let num_chains = embedding.num_chains().max(1) as f64;
    let per_read: Vec<ReadBreaks> = samples
        .reads
        .iter()
        .map(|r| {
            let broken_chains: Vec<usize> = embedding
                .chains()
                .filter(|(_, c)| is_broken(&r.config, c))
                .map(|(v, _)| v)
                .collect();
            let broken_fraction = broken_chains.len() as f64 / num_chains;
            ReadBreaks {
                broken_chains,
                broken_fraction,
            }
        })
        .collect();
    let total = samples.total_reads().max(1) as f64;
    let weighted = |f: &dyn Fn(&ReadBreaks) -> f64| {
        per_read
            .iter()
            .zip(&samples.reads)
            .map(|(b, r)| f(b) * r.occurrences as f64)
            .sum::<f64>()
            / total
    };
    let aggregate_broken_fraction = weighted(&|b| b.broken_fraction);
    let broken_read_fraction = weighted(&|b| f64::from(u8::from(!b.broken_chains.is_empty())));
    Ok(ChainReport {
        per_read,
        aggregate_broken_fraction,
        broken_read_fraction,
    })
}

/// How reads with broken chains are turned into logical reads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnembedPolicy {
    /// Majority spin per chain, seeded coin on exact ties.
    #[default]
    MajorityVote,
    /// Drop any read with a broken chain.
    Discard,
}

/// Majority-vote unembedding.
pub fn unembed(
    samples: &SampleSet,
    embedding: &Embedding,
    problem: &IsingProblem,
    tie_seed: u64,
) -> Result<SampleSet> {
    unembed_with(samples, embedding, problem, tie_seed, UnembedPolicy::MajorityVote)
}

pub fn unembed_with(
    samples: &SampleSet,
    embedding: &Embedding,
    problem: &IsingProblem,
    tie_seed: u64,
    policy: UnembedPolicy,
) -> Result<SampleSet> {
    check_qubits(samples, embedding)?;
    let n = problem.num_vars();
    if let Some(v) = (0..n).find(|&v| embedding.chain(v).is_none()) {
        return Err(arg(format!("variable {v} has no chain")));
    }
    let mut reads = Vec::with_capacity(samples.reads.len());
    for (idx, r) in samples.reads.iter().enumerate() {
        if policy == UnembedPolicy::Discard
            && embedding.chains().any(|(_, c)| is_broken(&r.config, c))
        {
            continue;
        }
        let mut coin: Option<ChaCha8Rng> = None;
        let spins: Vec<Spin> = (0..n)
            .map(|v| {
                let chain = embedding.chain(v).expect("checked above");
                let sum: i64 = chain.iter().map(|&q| i64::from(r.config[q])).sum();
                match sum.signum() {
                    1 => 1,
                    -1 => -1,
                    _ => {
                        let rng = coin.get_or_insert_with(|| {
                            let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
                            rng.set_stream(idx as u64);
                            rng
                        });
                        // one word per variable keeps the coin tied to (read, var)
                        rng.set_word_pos(v as u128 * 16);
                        if rng.gen::<bool>() { 1 } else { -1 }
                    }
                }
            })
            .collect();
        let energy = problem.energy_unchecked(&spins);
        reads.push(Read {
            config: Configuration::new(spins)?,
            energy,
            occurrences: r.occurrences,
        });
    }
    let mut info = samples.info.clone();
    info.kind = format!(
        "{}+{}",
        info.kind,
        match policy {
            UnembedPolicy::MajorityVote => "majority_vote",
            UnembedPolicy::Discard => "discard_broken",
        }
    );
    Ok(SampleSet {
        reads,
        info,
        problem_ref: problem.label().to_string(),
    })
}

/// Occurrence-weighted count of reads within `tol` of `reference_energy`.
pub fn success_count(samples: &SampleSet, reference_energy: f64, tol: f64) -> usize {
    samples
        .reads
        .iter()
        .filter(|r| r.energy <= reference_energy + tol)
        .map(|r| r.occurrences)
        .sum()
}

/// Fraction of reads at (or below) the reference energy.
pub fn success_probability(samples: &SampleSet, reference_energy: f64, tol: f64) -> Result<f64> {
    let total = samples.total_reads();
    if total == 0 {
        return Err(arg("success probability of an empty sample set"));
    }
    Ok(success_count(samples, reference_energy, tol) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::SamplerInfo;

    fn samples(configs: &[&[Spin]]) -> SampleSet {
        SampleSet {
            reads: configs
                .iter()
                .map(|c| Read {
                    config: Configuration::new(c.to_vec()).unwrap(),
                    energy: 0.0,
                    occurrences: 1,
                })
                .collect(),
            info: SamplerInfo {
                kind: "test".into(),
                num_reads: configs.len(),
                sweeps: None,
                schedule: String::new(),
                seed: 0,
            },
            problem_ref: String::new(),
        }
    }

    fn with_energies(es: &[f64]) -> SampleSet {
        let mut s = samples(&vec![&[1i8][..]; es.len()]);
        for (r, &e) in s.reads.iter_mut().zip(es) {
            r.energy = e;
        }
        s
    }

    #[test]
    fn breaks_are_detected() {
        let emb = Embedding::new([(0, vec![0, 1, 2]), (1, vec![3])]);
        let s = samples(&[&[1, 1, -1, 1], &[1, 1, 1, -1]]);
        let report = detect_breaks(&s, &emb).unwrap();
        assert_eq!(report.per_read[0].broken_chains, vec![0]);
        assert_eq!(report.per_read[0].broken_fraction, 0.5);
        assert_eq!(report.per_read[1].broken_fraction, 0.0);
        assert_eq!(report.aggregate_broken_fraction, 0.25);
        assert_eq!(report.broken_read_fraction, 0.5);
    }

    #[test]
    fn singletons_never_break() {
        let emb = Embedding::identity(3);
        let s = samples(&[&[1, -1, 1], &[-1, -1, 1]]);
        assert!(!detect_breaks(&s, &emb).unwrap().any_broken());
    }

    #[test]
    fn index_mismatch_is_an_error() {
        let emb = Embedding::new([(0, vec![0, 5])]);
        let s = samples(&[&[1, 1]]);
        assert!(detect_breaks(&s, &emb).is_err());
    }

    #[test]
    fn majority_vote() {
        let p = IsingProblem::new(1, [(0, 1.0)], [], "").unwrap();
        let emb = Embedding::new([(0, vec![0, 1, 2])]);
        let s = samples(&[&[1, -1, -1]]);
        let l = unembed(&s, &emb, &p, 0).unwrap();
        assert_eq!(l.reads[0].config.spins(), &[-1]);
        assert_eq!(l.reads[0].energy, -1.0);
    }

    #[test]
    fn ties_are_deterministic() {
        let p = IsingProblem::new(2, [], [(0, 1, -1.0)], "").unwrap();
        let emb = Embedding::new([(0, vec![0, 1]), (1, vec![2, 3])]);
        let s = samples(&[&[1i8, -1, -1, 1][..]; 8]);
        let a = unembed(&s, &emb, &p, 3).unwrap();
        assert_eq!(a, unembed(&s, &emb, &p, 3).unwrap());
        // both outcomes show up across reads
        let ups = a.reads.iter().filter(|r| r.config[0] == 1).count();
        assert!(ups > 0 && ups < 8);
    }

    #[test]
    fn discard_drops_broken_reads() {
        let p = IsingProblem::new(1, [], [], "").unwrap();
        let emb = Embedding::new([(0, vec![0, 1])]);
        let s = samples(&[&[1, -1], &[1, 1]]);
        let l = unembed_with(&s, &emb, &p, 0, UnembedPolicy::Discard).unwrap();
        assert_eq!(l.total_reads(), 1);
        assert!(l.info.kind.ends_with("discard_broken"));
    }

    #[test]
    fn success_probability_cases() {
        let s = with_energies(&[-3.16, -3.16, -0.84, 0.0]);
        assert_eq!(success_probability(&s, -3.16, 1e-9).unwrap(), 0.5);
        let all = with_energies(&[-1.0, -1.0]);
        assert_eq!(success_probability(&all, -1.0, 1e-9).unwrap(), 1.0);
        assert_eq!(success_probability(&all, -2.0, 1e-9).unwrap(), 0.0);
        assert!(success_probability(&with_energies(&[]), 0.0, 1e-9).is_err());
    }

    proptest::proptest! {
        #[test]
        fn probability_survives_duplication(es in proptest::collection::vec(-3i32..3, 1..40)) {
            let es: Vec<f64> = es.into_iter().map(f64::from).collect();
            let s = with_energies(&es);
            let mut doubled = s.clone();
            doubled.reads.extend(s.reads.clone());
            let a = success_probability(&s, -3.0, 1e-9).unwrap();
            let b = success_probability(&doubled, -3.0, 1e-9).unwrap();
            proptest::prop_assert_eq!(a, b);
        }

        #[test]
        fn breaks_commute_with_permutation(rot in 0usize..6) {
            let emb = Embedding::new([(0, vec![0, 1]), (1, vec![2])]);
            let configs: Vec<&[Spin]> = vec![&[1, 1, 1], &[1, -1, 1], &[-1, -1, 1], &[-1, 1, -1], &[1, 1, -1], &[-1, 1, 1]];
            let mut rotated = configs.clone();
            rotated.rotate_left(rot);
            let a = detect_breaks(&samples(&configs), &emb).unwrap();
            let b = detect_breaks(&samples(&rotated), &emb).unwrap();
            let mut pa = a.per_read.clone();
            pa.rotate_left(rot);
            proptest::prop_assert_eq!(pa, b.per_read);
            proptest::prop_assert_eq!(a.aggregate_broken_fraction, b.aggregate_broken_fraction);
        }
    }
}
