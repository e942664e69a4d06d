//! Config-driven runs: the commands of the `chaintune` binary and the three
//! figure experiments.
//!
//! A run is fully determined by an [`ExperimentConfig`] (after the optional
//! seed override) and the crate version. Every CSV carries `# key=value`
//! metadata lines naming the config hash, the sampler kind and the version,
//! so no file can be mistaken for hardware data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chains::{
    detect_breaks, success_count, unembed_with, UnembedPolicy, GROUND_MATCH_TOLERANCE,
};
use crate::embedding::{find_embedding, load_embedding, save_embedding, Embedding};
use crate::error::{arg, format_err, read_file, write_file, Result};
use crate::model::{gen_fully_connected, gen_j1j2, IsingProblem};
use crate::parameterize::{default_chain_strength, embed_problem};
use crate::samplers::{
    exact_spectrum, SampleSet, Sampler, SimulatedAnnealing, DEFAULT_BETA_RANGE, DEFAULT_SWEEPS,
    MAX_EXACT_SPINS,
};
use crate::spectrum::{gap_scan, jc_grid, GapScan};
use crate::topology::{gen_chimera, gen_pegasus, load_graph, HardwareGraph};
use crate::tuner::{tune, TuneConfig, TuneResult, TuneStatus, OPTIMAL_FACTOR};

pub const CRATE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemSpec {
    J1j2 {
        size: usize,
        #[serde(default = "one")]
        j1: f64,
        j2: f64,
    },
    FullyConnected {
        n: usize,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Chimera { m: usize },
    Pegasus { m: usize },
    File { path: PathBuf },
    /// The logical problem graph itself, for identity embeddings.
    FromProblem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum EmbeddingSpec {
    Heuristic {
        /// Falls back to the run seed.
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_tries")]
        max_tries: usize,
    },
    File {
        path: PathBuf,
    },
    Identity,
}

fn default_tries() -> usize {
    20
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        Self::Heuristic {
            seed: None,
            max_tries: default_tries(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default = "default_beta_min")]
    pub beta_min: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
}

fn default_sweeps() -> usize {
    DEFAULT_SWEEPS
}
fn default_beta_min() -> f64 {
    DEFAULT_BETA_RANGE.0
}
fn default_beta_max() -> f64 {
    DEFAULT_BETA_RANGE.1
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            sweeps: DEFAULT_SWEEPS,
            beta_min: DEFAULT_BETA_RANGE.0,
            beta_max: DEFAULT_BETA_RANGE.1,
        }
    }
}

impl SamplerSpec {
    pub fn build(&self) -> Result<SimulatedAnnealing> {
        SimulatedAnnealing::new(self.sweeps, (self.beta_min, self.beta_max))
    }
}

/// Chain strength for `sample`: a number, the default formula, or the tuned
/// optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainStrengthSpec {
    Value(f64),
    Named(NamedStrength),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedStrength {
    Default,
    Optimal,
}

impl Default for ChainStrengthSpec {
    fn default() -> Self {
        Self::Named(NamedStrength::Default)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "grid_min")]
    pub jc_min: f64,
    #[serde(default = "grid_max")]
    pub jc_max: f64,
    #[serde(default = "grid_step")]
    pub jc_step: f64,
}

fn grid_min() -> f64 {
    0.5
}
fn grid_max() -> f64 {
    4.0
}
fn grid_step() -> f64 {
    0.05
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            jc_min: grid_min(),
            jc_max: grid_max(),
            jc_step: grid_step(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentName {
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3_4")]
    Fig34,
    #[serde(rename = "fig5_6")]
    Fig56,
}

/// Parameter lists for the figure experiments. The problem spec acts as a
/// template: `j2_values` replaces `j2` of a `j1j2` problem, `n_values`
/// replaces `n` of a `fully_connected` one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    #[serde(default)]
    pub j2_values: Vec<f64>,
    #[serde(default)]
    pub n_values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
    pub graph: GraphSpec,
    #[serde(default)]
    pub embedding: EmbeddingSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default = "search_reads")]
    pub search_reads: usize,
    #[serde(default = "measure_reads")]
    pub measure_reads: usize,
    #[serde(default = "step_cap")]
    pub step_cap: usize,
    #[serde(default = "optimal_factor")]
    pub optimal_factor: f64,
    #[serde(default = "unbroken_quantile")]
    pub unbroken_quantile: f64,
    #[serde(default)]
    pub unembed_policy: UnembedPolicy,
    #[serde(default)]
    pub chain_strength: ChainStrengthSpec,
    #[serde(default)]
    pub gapscan: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn search_reads() -> usize {
    100
}
fn measure_reads() -> usize {
    5000
}
fn step_cap() -> usize {
    50
}
fn optimal_factor() -> f64 {
    OPTIMAL_FACTOR
}
fn unbroken_quantile() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| format_err("config", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&read_file(path)?)
            .map_err(|e| format_err(path.display().to_string(), e.to_string()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        crate::jsonfmt::to_string_rows(self)
    }

    /// sha256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn tune_config(&self, seed: u64) -> TuneConfig {
        TuneConfig {
            search_reads: self.search_reads,
            step_cap: self.step_cap,
            optimal_factor: self.optimal_factor,
            unbroken_quantile: self.unbroken_quantile,
            seed,
        }
    }

    pub fn build_problem(&self) -> Result<IsingProblem> {
        match &self.problem {
            ProblemSpec::J1j2 { size, j1, j2 } => gen_j1j2(*size, *j1, *j2),
            ProblemSpec::FullyConnected { n, seed } => gen_fully_connected(*n, *seed),
            ProblemSpec::File { path } => IsingProblem::load(self.resolve(path)),
        }
    }

    pub fn build_graph(&self, problem: &IsingProblem) -> Result<HardwareGraph> {
        match &self.graph {
            GraphSpec::Chimera { m } => gen_chimera(*m),
            GraphSpec::Pegasus { m } => gen_pegasus(*m),
            GraphSpec::File { path } => load_graph(self.resolve(path)),
            GraphSpec::FromProblem => Ok(HardwareGraph::from_problem(problem)),
        }
    }

    pub fn build_embedding(&self, problem: &IsingProblem, graph: &HardwareGraph) -> Result<Embedding> {
        match &self.embedding {
            EmbeddingSpec::Heuristic { seed, max_tries } => {
                find_embedding(problem, graph, seed.unwrap_or(self.seed), *max_tries)
            }
            EmbeddingSpec::File { path } => load_embedding(self.resolve(path), graph),
            EmbeddingSpec::Identity => Ok(Embedding::identity(problem.num_vars())),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Independent seed for a named sub-run, so adding a stage never shifts the
/// random numbers of another.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Problem,
    Embed,
    Tune,
    Sample,
    Gapscan,
    Experiment,
}

impl FromStr for Command {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "problem" => Self::Problem,
            "embed" => Self::Embed,
            "tune" => Self::Tune,
            "sample" => Self::Sample,
            "gapscan" => Self::Gapscan,
            "experiment" => Self::Experiment,
            _ => return Err(arg(format!("unknown command '{s}'"))),
        })
    }
}

/// Files written by one command, in write order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    out: &'a Path,
    meta: Vec<(&'static str, String)>,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(out: &'a Path, cfg: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|source| crate::Error::Io {
            path: out.to_path_buf(),
            source,
        })?;
        Ok(Self {
            out,
            meta: vec![
                ("config_hash", cfg.hash()),
                ("sampler", SimulatedAnnealing::KIND.to_string()),
                ("crate_version", CRATE_VERSION.to_string()),
                ("seed", cfg.seed.to_string()),
            ],
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        write_file(&path, contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    fn meta_lines(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| arg(e.to_string()))?)
            .expect("csv is utf-8");
        let text = self.meta_lines() + &body;
        self.put(name, &text)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        #[derive(Serialize)]
        struct WithMeta<'b, T> {
            meta: std::collections::BTreeMap<&'static str, &'b str>,
            #[serde(flatten)]
            value: &'b T,
        }
        let meta = self.meta.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let text = crate::jsonfmt::to_string_rows(&WithMeta { meta, value })?;
        self.put(name, &text)
    }

    fn finish(self) -> RunOutput {
        RunOutput { files: self.files }
    }
}

/// Runs one command, writing its files into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let mut w = Writer::new(out, cfg)?;
    match command {
        Command::Problem => cmd_problem(cfg, &mut w)?,
        Command::Embed => cmd_embed(cfg, &mut w)?,
        Command::Tune => cmd_tune(cfg, &mut w)?,
        Command::Sample => cmd_sample(cfg, &mut w)?,
        Command::Gapscan => cmd_gapscan(cfg, &mut w)?,
        Command::Experiment => cmd_experiment(cfg, &mut w)?,
    }
    w.put("config.resolved.json", &cfg.to_json()?)?;
    Ok(w.finish())
}

fn cmd_problem(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let problem = cfg.build_problem()?;
    w.put("problem.json", &problem.to_json()?)
}

#[derive(Serialize)]
struct EmbedSummary {
    graph: String,
    num_chains: usize,
    total_qubits: usize,
    extra_qubits: usize,
    max_chain_length: usize,
    digest: String,
}

fn cmd_embed(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let problem = cfg.build_problem()?;
    let graph = cfg.build_graph(&problem)?;
    let emb = cfg.build_embedding(&problem, &graph)?;
    let path = w.out.join("embedding.json");
    save_embedding(&emb, &path)?;
    w.files.push(path);
    w.json(
        "embed_summary.json",
        &EmbedSummary {
            graph: graph.kind().to_string(),
            num_chains: emb.num_chains(),
            total_qubits: emb.total_qubits(),
            extra_qubits: emb.extra_qubits(),
            max_chain_length: emb.max_chain_length(),
            digest: emb.digest(),
        },
    )
}

fn cmd_tune(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let problem = cfg.build_problem()?;
    let graph = cfg.build_graph(&problem)?;
    let emb = cfg.build_embedding(&problem, &graph)?;
    let sampler = cfg.sampler.build()?;
    let result = tune(&problem, &emb, &graph, &sampler, &cfg.tune_config(derive_seed(cfg.seed, "tune")))?;
    w.json("tune.json", &result)?;
    let text = w.meta_lines() + &result.trace_csv();
    w.put("tune_trace.csv", &text)
}

#[derive(Serialize)]
struct SampleSummary {
    chain_strength: f64,
    chain_strength_source: String,
    physical_qubits: usize,
    reads: usize,
    unembed_policy: UnembedPolicy,
    aggregate_broken_fraction: f64,
    broken_read_fraction: f64,
    reference_energy: f64,
    reference_source: &'static str,
    success_probability: f64,
    min_logical_energy: Option<f64>,
}

fn cmd_sample(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let problem = cfg.build_problem()?;
    let graph = cfg.build_graph(&problem)?;
    let emb = cfg.build_embedding(&problem, &graph)?;
    let sampler = cfg.sampler.build()?;
    let (jc, source) = match cfg.chain_strength {
        ChainStrengthSpec::Value(v) => (v, "value".to_string()),
        ChainStrengthSpec::Named(NamedStrength::Default) => {
            (default_chain_strength(&problem)?, "default".to_string())
        }
        ChainStrengthSpec::Named(NamedStrength::Optimal) => {
            let t = tune(&problem, &emb, &graph, &sampler, &cfg.tune_config(derive_seed(cfg.seed, "tune")))?;
            match (t.status, t.jc_optimal) {
                (TuneStatus::Found, Some(j)) => (j, "optimal".to_string()),
                (TuneStatus::NoChains, _) => (t.jc_default, "default (no chains)".to_string()),
                _ => return Err(arg("tuner did not converge; no optimal chain strength")),
            }
        }
    };
    let m = measure(cfg, &problem, &emb, &graph, &sampler, jc, derive_seed(cfg.seed, "sample"))?;
    let (reference, ref_source) = match exact_ground(&problem)? {
        Some(e) => (e, "exact"),
        None => (
            m.logical.min_energy().ok_or_else(|| arg("no reads survived unembedding"))?,
            "best_observed",
        ),
    };
    let path = w.out.join("samples_physical.json");
    m.physical.save(&path)?;
    w.files.push(path);
    let path = w.out.join("samples_logical.json");
    m.logical.save(&path)?;
    w.files.push(path);
    w.json(
        "sample_summary.json",
        &SampleSummary {
            chain_strength: jc,
            chain_strength_source: source,
            physical_qubits: emb.total_qubits(),
            reads: cfg.measure_reads,
            unembed_policy: cfg.unembed_policy,
            aggregate_broken_fraction: m.aggregate_broken_fraction,
            broken_read_fraction: m.broken_read_fraction,
            reference_energy: reference,
            reference_source: ref_source,
            success_probability: m.p(reference, cfg.measure_reads),
            min_logical_energy: m.logical.min_energy(),
        },
    )
}

fn cmd_gapscan(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let problem = cfg.build_problem()?;
    let graph = cfg.build_graph(&problem)?;
    let emb = cfg.build_embedding(&problem, &graph)?;
    let scan = run_scan(cfg, &problem, &emb, &graph)?;
    let text = scan.to_csv(&w.meta)?;
    w.put("gapscan.csv", &text)
}

fn run_scan(
    cfg: &ExperimentConfig,
    problem: &IsingProblem,
    emb: &Embedding,
    graph: &HardwareGraph,
) -> Result<GapScan> {
    let g = &cfg.gapscan;
    gap_scan(problem, emb, graph, &jc_grid(g.jc_min, g.jc_max, g.jc_step)?)
}

/// One measurement run at a fixed chain strength.
pub struct Measurement {
    pub physical: SampleSet,
    pub logical: SampleSet,
    pub aggregate_broken_fraction: f64,
    pub broken_read_fraction: f64,
}

impl Measurement {
    /// Success probability over all requested reads; reads dropped by the
    /// discard policy count as failures.
    pub fn p(&self, reference: f64, reads: usize) -> f64 {
        success_count(&self.logical, reference, GROUND_MATCH_TOLERANCE) as f64 / reads as f64
    }
}

pub fn measure(
    cfg: &ExperimentConfig,
    problem: &IsingProblem,
    emb: &Embedding,
    graph: &HardwareGraph,
    sampler: &dyn Sampler,
    jc: f64,
    seed: u64,
) -> Result<Measurement> {
    let ep = embed_problem(problem, emb, graph, jc)?;
    let physical = sampler.sample(ep.physical(), cfg.measure_reads, seed)?;
    let report = detect_breaks(&physical, ep.sample_embedding())?;
    let logical = unembed_with(
        &physical,
        ep.sample_embedding(),
        problem,
        derive_seed(seed, "ties"),
        cfg.unembed_policy,
    )?;
    Ok(Measurement {
        physical,
        logical,
        aggregate_broken_fraction: report.aggregate_broken_fraction,
        broken_read_fraction: report.broken_read_fraction,
    })
}

fn exact_ground(problem: &IsingProblem) -> Result<Option<f64>> {
    if problem.num_vars() > MAX_EXACT_SPINS {
        return Ok(None);
    }
    Ok(Some(exact_spectrum(problem, None)?.ground_energy))
}

fn cmd_experiment(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let spec = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| arg("config has no \"experiment\" block"))?;
    match spec.name {
        ExperimentName::Fig2 => fig2(cfg, spec, w),
        ExperimentName::Fig34 => {
            let rows = fig3_4(cfg, spec)?;
            w.csv("fig3_4.csv", &rows)
        }
        ExperimentName::Fig56 => {
            let rows = fig5_6(cfg, spec)?;
            w.csv("fig5_6.csv", &rows)
        }
    }
}

fn j1j2_template(cfg: &ExperimentConfig) -> Result<(usize, f64)> {
    match cfg.problem {
        ProblemSpec::J1j2 { size, j1, .. } => Ok((size, j1)),
        _ => Err(arg("this experiment needs a j1j2 problem")),
    }
}

#[derive(Serialize)]
struct Fig2Row {
    j2_over_j1: f64,
    logical_delta: f64,
    j_c_star: Option<f64>,
    j_c_kink: Option<f64>,
    delta_c_at_max: f64,
    stays_unbroken: bool,
    physical_qubits: usize,
}

fn fig2(cfg: &ExperimentConfig, spec: &ExperimentSpec, w: &mut Writer) -> Result<()> {
    let (size, j1) = j1j2_template(cfg)?;
    if spec.j2_values.is_empty() {
        return Err(arg("fig2 needs j2_values"));
    }
    let scans = spec
        .j2_values
        .iter()
        .map(|&j2| {
            let problem = gen_j1j2(size, j1, j2)?;
            let graph = cfg.build_graph(&problem)?;
            let emb = cfg.build_embedding(&problem, &graph)?;
            Ok((j2, run_scan(cfg, &problem, &emb, &graph)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (j2, scan) in &scans {
        let mut meta = w.meta.clone();
        meta.push(("j2_over_j1", j2.to_string()));
        let text = scan.to_csv(&meta)?;
        w.put(&format!("gapscan_j2_{j2}.csv"), &text)?;
        rows.push(Fig2Row {
            j2_over_j1: *j2,
            logical_delta: scan.logical_delta,
            j_c_star: scan.j_c_star,
            j_c_kink: scan.j_c_kink,
            delta_c_at_max: scan.points.last().map_or(0.0, |p| p.delta_c),
            stays_unbroken: scan.stays_unbroken(),
            physical_qubits: scan.num_qubits,
        });
    }
    w.csv("fig2_summary.csv", &rows)
}

/// One row of the default-versus-optimal comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub j2_over_j1: Option<f64>,
    pub n: usize,
    pub n_t: usize,
    pub jc_default: f64,
    pub jc_star: Option<f64>,
    pub jc_optimal: Option<f64>,
    pub tune_status: TuneStatus,
    pub tune_steps: usize,
    pub delta_exact: Option<f64>,
    pub delta_estimate: Option<f64>,
    pub reference_energy: f64,
    pub reference_source: &'static str,
    pub p_default: f64,
    pub p_optimal: Option<f64>,
    pub broken_fraction_default: f64,
    pub broken_fraction_optimal: Option<f64>,
}

/// Tunes, then measures p at the default and at the optimal chain strength.
///
/// The reference energy is the exact ground when the logical problem fits
/// the enumerator, otherwise the lowest energy seen in any run of this
/// point, including a direct anneal of the logical problem.
pub fn compare_point(
    cfg: &ExperimentConfig,
    problem: &IsingProblem,
    graph: &HardwareGraph,
    tag: &str,
) -> Result<(ComparisonRow, TuneResult)> {
    let emb = cfg.build_embedding(problem, graph)?;
    let sampler = cfg.sampler.build()?;
    let seed = derive_seed(cfg.seed, tag);
    let t = tune(problem, &emb, graph, &sampler, &cfg.tune_config(derive_seed(seed, "tune")))?;
    // common random numbers for the two measurements
    let mseed = derive_seed(seed, "measure");
    let at_default = measure(cfg, problem, &emb, graph, &sampler, t.jc_default, mseed)?;
    let at_optimal = match t.jc_optimal {
        Some(j) => Some(measure(cfg, problem, &emb, graph, &sampler, j, mseed)?),
        None => None,
    };
    let direct = sampler.sample(problem, cfg.measure_reads, derive_seed(seed, "reference"))?;

    let mut energies: Vec<f64> = direct.reads.iter().map(|r| r.energy).collect();
    for m in std::iter::once(&at_default).chain(at_optimal.as_ref()) {
        energies.extend(m.logical.reads.iter().map(|r| r.energy));
    }
    energies.sort_by(f64::total_cmp);
    let lowest = energies[0];
    let delta_estimate = energies
        .iter()
        .find(|&&e| e > lowest + GROUND_MATCH_TOLERANCE)
        .map(|e| e - lowest);

    let exact = if problem.num_vars() <= MAX_EXACT_SPINS {
        Some(exact_spectrum(problem, None)?)
    } else {
        None
    };
    let (reference, reference_source) = match &exact {
        Some(s) => (s.ground_energy, "exact"),
        None => (lowest, "best_observed"),
    };
    let reads = cfg.measure_reads;
    let row = ComparisonRow {
        j2_over_j1: None,
        n: problem.num_vars(),
        n_t: emb.total_qubits(),
        jc_default: t.jc_default,
        jc_star: t.jc_star,
        jc_optimal: t.jc_optimal,
        tune_status: t.status,
        tune_steps: t.trace.len(),
        delta_exact: exact.as_ref().and_then(|s| s.gap()),
        delta_estimate,
        reference_energy: reference,
        reference_source,
        p_default: at_default.p(reference, reads),
        p_optimal: at_optimal.as_ref().map(|m| m.p(reference, reads)),
        broken_fraction_default: at_default.aggregate_broken_fraction,
        broken_fraction_optimal: at_optimal.as_ref().map(|m| m.aggregate_broken_fraction),
    };
    Ok((row, t))
}

pub fn fig3_4(cfg: &ExperimentConfig, spec: &ExperimentSpec) -> Result<Vec<ComparisonRow>> {
    let (size, j1) = j1j2_template(cfg)?;
    if spec.j2_values.is_empty() {
        return Err(arg("fig3_4 needs j2_values"));
    }
    spec.j2_values
        .par_iter()
        .map(|&j2| {
            let problem = gen_j1j2(size, j1, j2)?;
            let graph = cfg.build_graph(&problem)?;
            let (mut row, _) = compare_point(cfg, &problem, &graph, &format!("j2={j2}"))?;
            row.j2_over_j1 = Some(j2);
            Ok(row)
        })
        .collect()
}

pub fn fig5_6(cfg: &ExperimentConfig, spec: &ExperimentSpec) -> Result<Vec<ComparisonRow>> {
    let ProblemSpec::FullyConnected { seed, .. } = cfg.problem else {
        return Err(arg("fig5_6 needs a fully_connected problem"));
    };
    if spec.n_values.is_empty() {
        return Err(arg("fig5_6 needs n_values"));
    }
    spec.n_values
        .par_iter()
        .map(|&n| {
            let problem = gen_fully_connected(n, seed)?;
            let graph = cfg.build_graph(&problem)?;
            Ok(compare_point(cfg, &problem, &graph, &format!("n={n}"))?.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = cfg(r#"{"problem":{"family":"j1j2","size":2,"j2":0.42},"graph":{"kind":"pegasus","m":2}}"#);
        assert_eq!(c.search_reads, 100);
        assert_eq!(c.measure_reads, 5000);
        assert_eq!(c.step_cap, 50);
        assert_eq!(c.optimal_factor, 1.2);
        assert_eq!(c.chain_strength, ChainStrengthSpec::Named(NamedStrength::Default));
        assert_eq!(c.embedding, EmbeddingSpec::default());
        assert_eq!(c.gapscan, GridSpec::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = ExperimentConfig::from_json(
            r#"{"problem":{"family":"j1j2","size":2,"j2":0.4},"graph":{"kind":"pegasus","m":2},"reads":3}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn chain_strength_forms() {
        let c = cfg(r#"{"problem":{"family":"j1j2","size":2,"j2":0.4},"graph":{"kind":"from_problem"},"chain_strength":1.5}"#);
        assert_eq!(c.chain_strength, ChainStrengthSpec::Value(1.5));
        let c = cfg(r#"{"problem":{"family":"j1j2","size":2,"j2":0.4},"graph":{"kind":"from_problem"},"chain_strength":"optimal"}"#);
        assert_eq!(c.chain_strength, ChainStrengthSpec::Named(NamedStrength::Optimal));
    }

    #[test]
    fn seed_override_changes_hash() {
        let c = cfg(r#"{"problem":{"family":"fully_connected","n":4,"seed":1},"graph":{"kind":"chimera","m":2}}"#);
        let h = c.hash();
        assert_eq!(h.len(), 64);
        assert_eq!(c.clone().with_seed(None).hash(), h);
        assert_ne!(c.with_seed(Some(9)).hash(), h);
    }

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_eq!(derive_seed(1, "a"), derive_seed(1, "a"));
        assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
        assert_ne!(derive_seed(1, "a"), derive_seed(2, "a"));
    }

    #[test]
    fn command_names_parse() {
        for name in ["problem", "embed", "tune", "sample", "gapscan", "experiment"] {
            assert!(name.parse::<Command>().is_ok());
        }
        assert!("plot".parse::<Command>().is_err());
    }
}
