// SPDX-License-Identifier: Apache-2.0

//! Data-flow consistency between the baseline and DIFT executions, and
//! between optimized and unoptimized kernels.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{optimize, Kernel};
use crate::tainted::DiftConfig;

use super::inputs::{random_inputs, RunInputs, TagChoice};
use super::{run_baseline, run_dift, SimulationReport, TaggedOutput};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub sample: usize,
    pub inputs: RunInputs,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sample {}: {}", self.sample, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub samples: usize,
    /// Samples where both sides raised the same evaluation error.
    pub faulted: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Error identity ignoring the step index, which passes may shift.
fn error_key(e: &Error) -> (Option<&str>, &Error) {
    match e {
        Error::AtNode { node, source, .. } => (Some(node.as_str()), source.root()),
        e => (None, e),
    }
}

/// What optimization must preserve: output values and tags, and the
/// exception sequence without step indices.
#[derive(Debug, PartialEq, Eq)]
struct Observable<'a> {
    outputs: &'a BTreeMap<String, TaggedOutput>,
    exceptions: Vec<(&'a str, &'a str, u32, &'a str)>,
    irq: bool,
    halted: bool,
}

fn observable(r: &SimulationReport) -> Observable<'_> {
    Observable {
        outputs: &r.outputs,
        exceptions: r
            .exceptions
            .iter()
            .map(|e| (e.checkpoint_id.as_str(), e.node_id.as_str(), e.tag_bits, e.policy_name.as_str()))
            .collect(),
        irq: r.irq,
        halted: r.halted,
    }
}

fn compare_values(base: &Result<BTreeMap<String, u64>>, dift: &Result<SimulationReport>) -> Option<String> {
    match (base, dift) {
        // Halted runs produce no outputs; the checkpoint fired before any
        // later divergence could be observed.
        (_, Ok(d)) if d.halted => None,
        (Ok(b), Ok(d)) => {
            let dv: BTreeMap<&String, u64> = d.outputs.iter().map(|(k, o)| (k, o.value)).collect();
            let bv: BTreeMap<&String, u64> = b.iter().map(|(k, v)| (k, *v)).collect();
            (bv != dv).then(|| format!("baseline outputs {bv:?} != dift outputs {dv:?}"))
        }
        (Err(b), Err(d)) => (error_key(b) != error_key(d)).then(|| format!("baseline error `{b}` != dift error `{d}`")),
        (Ok(_), Err(d)) => Some(format!("dift failed alone: {d}")),
        (Err(b), Ok(_)) => Some(format!("baseline failed alone: {b}")),
    }
}

fn compare_runs(orig: &Result<SimulationReport>, opt: &Result<SimulationReport>) -> Option<String> {
    match (orig, opt) {
        (Ok(a), Ok(b)) => {
            let (oa, ob) = (observable(a), observable(b));
            (oa != ob).then(|| format!("optimized run differs: {oa:?} != {ob:?}"))
        }
        (Err(a), Err(b)) => (error_key(a) != error_key(b)).then(|| format!("optimized error `{b}` != original `{a}`")),
        (Ok(_), Err(b)) => Some(format!("optimized kernel failed alone: {b}")),
        (Err(a), Ok(_)) => Some(format!("original kernel failed alone: {a}")),
    }
}

/// Runs `samples` seeded random input and tag assignments through the
/// baseline and DIFT executions of `k`, and through the DIFT executions of
/// `k` and its optimized form, recording every divergence.
pub fn check_consistency(k: &Kernel, cfg: &DiftConfig, samples: usize, seed: u64) -> Result<ConsistencyReport> {
    let (optimized, _) = optimize(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConsistencyReport {
        samples,
        faulted: 0,
        mismatches: Vec::new(),
    };
    for sample in 0..samples {
        let inputs = random_inputs(k, TagChoice::Random, &mut rng)?;
        let base = run_baseline(k, &inputs);
        let dift = run_dift(k, &inputs, cfg);
        if let (Err(e), _) | (_, Err(e)) = (&base, &dift) {
            if !e.is_evaluation() {
                return Err(e.clone());
            }
        }
        if base.is_err() && dift.is_err() {
            report.faulted += 1;
        }
        let opt = run_dift(&optimized, &inputs, cfg);
        let problems = [compare_values(&base, &dift), compare_runs(&dift, &opt)];
        for detail in problems.into_iter().flatten() {
            report.mismatches.push(Mismatch {
                sample,
                inputs: inputs.clone(),
                detail,
            });
        }
    }
    Ok(report)
}
