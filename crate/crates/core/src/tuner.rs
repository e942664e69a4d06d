//! Chain-strength sweep: start weak, raise in fixed steps until no chain
//! breaks, then back off by a fixed factor above that critical value.

use std::fmt::Write as _;

use serde::Serialize;

use crate::chains::detect_breaks;
use crate::embedding::Embedding;
use crate::error::{arg, Result};
use crate::model::IsingProblem;
use crate::parameterize::{default_chain_strength, embed_problem};
use crate::samplers::Sampler;
use crate::topology::HardwareGraph;

/// Chain strength used once the critical value is known, as a multiple of it.
pub const OPTIMAL_FACTOR: f64 = 1.2;
/// Sweep step (and starting point) as a fraction of the default strength.
pub const STEP_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuneConfig {
    /// Reads per sweep step.
    pub search_reads: usize,
    /// Steps tried before giving up.
    pub step_cap: usize,
    pub optimal_factor: f64,
    /// Fraction of reads that must be free of breaks for a step to count as
    /// unbroken. 1.0 means every read.
    pub unbroken_quantile: f64,
    /// Sampler seed; every step reuses it so steps differ only in strength.
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            search_reads: 100,
            step_cap: 50,
            optimal_factor: OPTIMAL_FACTOR,
            unbroken_quantile: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneStatus {
    Found,
    NoChains,
    NotConverged,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub jc: f64,
    pub aggregate_broken_fraction: f64,
    pub broken_read_fraction: f64,
    pub reads_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuneResult {
    pub jc_default: f64,
    pub jc_star: Option<f64>,
    pub jc_optimal: Option<f64>,
    pub trace: Vec<TraceStep>,
    pub status: TuneStatus,
}

impl TuneResult {
    pub fn to_json(&self) -> Result<String> {
        crate::jsonfmt::to_string_rows(self)
    }

    /// `step,jc,broken_fraction,...` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,jc,broken_fraction,broken_read_fraction,reads\n");
        for s in &self.trace {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.step, s.jc, s.aggregate_broken_fraction, s.broken_read_fraction, s.reads_used
            );
        }
        out
    }
}

/// Runs the sweep `jc = k * 0.1 * jc_default`, `k = 1, 2, ...`.
pub fn tune(
    problem: &IsingProblem,
    embedding: &Embedding,
    graph: &HardwareGraph,
    sampler: &dyn Sampler,
    cfg: &TuneConfig,
) -> Result<TuneResult> {
    if cfg.search_reads == 0 {
        return Err(arg("search_reads must be at least 1"));
    }
    if !(cfg.unbroken_quantile > 0.0 && cfg.unbroken_quantile <= 1.0) {
        return Err(arg("unbroken_quantile must lie in (0, 1]"));
    }
    let jc_default = default_chain_strength(problem)?;
    let step = STEP_FRACTION * jc_default;
    // validates the embedding even when there is nothing to sweep
    let base = embed_problem(problem, embedding, graph, step)?;
    let mut result = TuneResult {
        jc_default,
        jc_star: None,
        jc_optimal: None,
        trace: Vec::new(),
        status: TuneStatus::NotConverged,
    };
    if embedding.all_singletons() {
        result.status = TuneStatus::NoChains;
        return Ok(result);
    }
    let needed = (cfg.unbroken_quantile * cfg.search_reads as f64).ceil() as usize;
    for k in 1..=cfg.step_cap {
        let jc = k as f64 * step;
        let ep = base.with_chain_strength(jc)?;
        let samples = sampler.sample(ep.physical(), cfg.search_reads, cfg.seed)?;
        let report = detect_breaks(&samples, ep.sample_embedding())?;
        let intact = report
            .per_read
            .iter()
            .zip(&samples.reads)
            .filter(|(b, _)| b.broken_chains.is_empty())
            .map(|(_, r)| r.occurrences)
            .sum::<usize>();
        result.trace.push(TraceStep {
            step: k,
            jc,
            aggregate_broken_fraction: report.aggregate_broken_fraction,
            broken_read_fraction: report.broken_read_fraction,
            reads_used: samples.total_reads(),
        });
        if intact >= needed {
            result.jc_star = Some(jc);
            result.jc_optimal = Some(cfg.optimal_factor * jc);
            result.status = TuneStatus::Found;
            break;
        }
    }
    Ok(result)
}

/// Applies the sweep's stopping rule to a precomputed broken-fraction trace.
/// Returns `(jc_star, jc_optimal)` as multiples of the default strength.
pub fn critical_from_trace(broken_fractions: &[f64], optimal_factor: f64) -> Option<(f64, f64)> {
    let k = broken_fractions.iter().position(|&f| f == 0.0)? + 1;
    let star = k as f64 * STEP_FRACTION;
    Some((star, optimal_factor * star))
}
