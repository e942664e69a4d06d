//! Minor-embedded Ising problems and chain-strength selection.
//!
//! The crate builds logical Ising problems ([`model`]), lays them onto
//! hardware graphs ([`topology`], [`embedding`]) with a ferromagnetic chain
//! coupling ([`parameterize`]), explores the resulting physical problems
//! exactly or by simulated annealing ([`samplers`]), and post-processes the
//! reads ([`chains`]). On top of that sit the exact gap scan over chain
//! strength ([`spectrum`]), the sweep that picks a chain strength from
//! sampled chain breaks ([`tuner`]) and the experiment harness
//! ([`experiment`]) behind the `chaintune` binary.

pub mod chains;
pub mod embedding;
mod error;
mod jsonfmt;
pub mod experiment;
pub mod model;
pub mod parameterize;
pub mod samplers;
pub mod spectrum;
pub mod topology;
pub mod tuner;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::chains::{
        detect_breaks, success_probability, unembed, unembed_with, ChainReport, UnembedPolicy,
    };
    pub use crate::embedding::{find_embedding, validate, Embedding, ValidationReport};
    pub use crate::model::{gen_fully_connected, gen_j1j2, Configuration, IsingProblem};
    pub use crate::parameterize::{default_chain_strength, embed_problem, EmbeddedProblem};
    pub use crate::samplers::{exact_spectrum, sa_sample, SampleSet, Sampler, SimulatedAnnealing};
    pub use crate::spectrum::{gap_scan, jc_grid, GapScan};
    pub use crate::topology::{gen_chimera, gen_pegasus, load_graph, HardwareGraph};
    pub use crate::tuner::{tune, TuneConfig, TuneResult, TuneStatus};
    pub use crate::{Error, Result};
}
