//! Exact embedded-spectrum gap as a function of chain strength.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::Embedding;
use crate::error::{arg, Error, Result};
use crate::model::IsingProblem;
use crate::parameterize::embed_problem;
use crate::samplers::{exact_spectrum, exact_spectrum_classified, MAX_EXACT_SPINS};
use crate::topology::HardwareGraph;

/// Tolerance for "the embedded gap has reached the logical gap".
pub const PLATEAU_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub jc: f64,
    /// Embedded gap, forced to 0 when some ground state has a broken chain.
    pub delta_c: f64,
    pub ground_has_break: bool,
    pub ground_energy: f64,
    pub first_excited_energy: Option<f64>,
    pub ground_degeneracy: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapScan {
    pub points: Vec<GapPoint>,
    pub logical_delta: f64,
    /// Smallest scanned chain strength with a positive embedded gap.
    pub j_c_star: Option<f64>,
    /// Smallest scanned chain strength where the embedded gap reaches the
    /// logical gap.
    pub j_c_kink: Option<f64>,
    pub num_qubits: usize,
    pub problem: String,
    pub embedding_digest: String,
}

/// `count` evenly spaced values from `min` to `max`, rounded to 1e-12 so
/// that grid points such as 4.0 come out exact.
pub fn jc_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && step > 0.0 && max >= min) {
        return Err(arg(format!("bad grid [{min}, {max}] step {step}")));
    }
    let steps = ((max - min) / step).round() as usize;
    Ok((0..=steps)
        .map(|k| ((min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Scans the exact gap of the embedded problem over `jc_values`.
///
/// At each point the physical problem is enumerated; the gap counts only if
/// every degenerate ground state keeps all chains intact.
pub fn gap_scan(
    problem: &IsingProblem,
    embedding: &Embedding,
    graph: &HardwareGraph,
    jc_values: &[f64],
) -> Result<GapScan> {
    let Some(&first) = jc_values.first() else {
        return Err(arg("empty chain strength list"));
    };
    if jc_values.iter().any(|&j| !(j > 0.0)) || jc_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(arg("chain strengths must be positive and strictly ascending"));
    }
    let base = embed_problem(problem, embedding, graph, first)?;
    if base.num_qubits() > MAX_EXACT_SPINS {
        return Err(Error::TooLarge {
            what: "gap scan",
            needed: base.num_qubits(),
            cap: MAX_EXACT_SPINS,
        });
    }
    let logical = exact_spectrum(problem, None)?;
    let logical_delta = logical
        .gap()
        .ok_or_else(|| arg("logical problem has a single energy level"))?;

    let masks: Vec<u64> = base
        .sample_embedding()
        .chains()
        .filter(|(_, c)| c.len() > 1)
        .map(|(_, c)| c.iter().fold(0u64, |m, &q| m | 1 << q))
        .collect();
    let broken = |bits: u64| masks.iter().any(|&m| bits & m != 0 && bits & m != m);

    let points = jc_values
        .par_iter()
        .map(|&jc| {
            let ep = base.with_chain_strength(jc)?;
            let (summary, flagged) = exact_spectrum_classified(ep.physical(), None, broken)?;
            let ground_has_break = flagged > 0;
            let delta_c = if ground_has_break {
                0.0
            } else {
                summary.gap().unwrap_or(0.0)
            };
            Ok(GapPoint {
                jc,
                delta_c,
                ground_has_break,
                ground_energy: summary.ground_energy,
                first_excited_energy: summary.first_excited_energy,
                ground_degeneracy: summary.ground_degeneracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let j_c_star = points.iter().find(|p| p.delta_c > 0.0).map(|p| p.jc);
    let j_c_kink = points
        .iter()
        .find(|p| p.delta_c >= logical_delta - PLATEAU_TOLERANCE)
        .map(|p| p.jc);
    Ok(GapScan {
        points,
        logical_delta,
        j_c_star,
        j_c_kink,
        num_qubits: base.num_qubits(),
        problem: problem.label().to_string(),
        embedding_digest: embedding.digest(),
    })
}

impl GapScan {
    /// No point after `j_c_star` drops back to a zero gap.
    pub fn stays_unbroken(&self) -> bool {
        match self.points.iter().position(|p| p.delta_c > 0.0) {
            Some(i) => self.points[i..].iter().all(|p| p.delta_c > 0.0),
            None => true,
        }
    }

    /// CSV with `# key=value` metadata lines ahead of the header.
    pub fn to_csv(&self, extra_meta: &[(&str, String)]) -> Result<String> {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let _ = writeln!(out, "# problem={}", self.problem);
        let _ = writeln!(out, "# embedding={}", self.embedding_digest);
        let _ = writeln!(out, "# physical_qubits={}", self.num_qubits);
        let _ = writeln!(out, "# logical_delta={}", self.logical_delta);
        let _ = writeln!(out, "# j_c_star={}", opt(self.j_c_star));
        let _ = writeln!(out, "# j_c_kink={}", opt(self.j_c_kink));
        for (k, v) in extra_meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "jc",
            "delta_c",
            "ground_has_break",
            "ground_energy",
            "first_excited_energy",
            "ground_degeneracy",
        ])?;
        for p in &self.points {
            w.write_record([
                p.jc.to_string(),
                p.delta_c.to_string(),
                p.ground_has_break.to_string(),
                p.ground_energy.to_string(),
                opt(p.first_excited_energy),
                p.ground_degeneracy.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| arg(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv is utf-8"));
        Ok(out)
    }
}
