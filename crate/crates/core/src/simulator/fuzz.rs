// SPDX-License-Identifier: Apache-2.0

//! Seeded property fuzzing of a kernel's tag semantics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernel::Kernel;
use crate::taint::{DiftMode, PropagationRule, TagPropagation};
use crate::tainted::DiftConfig;

use super::inputs::{random_inputs, random_tag, RunInputs, TagChoice};
use super::{monitor_for, run_dift_with, SimulationReport};

pub const UNTAINTED_CLOSURE: &str = "untainted_closure";
pub const UNION_MONOTONICITY: &str = "union_monotonicity";
pub const PRECISE_WITHIN_UNION: &str = "precise_within_union";
pub const FINE_WITHIN_COARSE: &str = "fine_within_coarse";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trial: usize,
    /// Reproduces the violation when run with the property's configuration.
    pub inputs: RunInputs,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub violations: usize,
    /// First violation found.
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub trials: usize,
    /// Trials skipped because the run raised an evaluation error.
    pub faulted: usize,
    pub properties: Vec<PropertyOutcome>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.violations == 0)
    }
}

struct Runner<'a> {
    k: &'a Kernel,
    union: &'a dyn TagPropagation,
}

impl Runner<'_> {
    fn run(&self, inputs: &RunInputs, mode: DiftMode) -> Result<SimulationReport> {
        let cfg = DiftConfig::new(self.k.tag_width, mode)?;
        let mut monitor = monitor_for(self.k)?;
        let propagation: &dyn TagPropagation = match mode {
            DiftMode::Fine(PropagationRule::FinePrecise) => &PropagationRule::FinePrecise,
            _ => self.union,
        };
        run_dift_with(self.k, inputs, &cfg, propagation, &mut monitor)
    }
}

fn subset(a: u32, b: u32) -> bool {
    a & !b == 0
}

/// Returns the first output whose tag in `small` is not a subset of its tag
/// in `big`.
fn output_not_within(small: &SimulationReport, big: &SimulationReport) -> Option<String> {
    small.outputs.iter().find_map(|(id, o)| {
        let b = big.outputs.get(id).map_or(0, |b| b.tag);
        (!subset(o.tag, b)).then(|| format!("output `{id}`: tag {:#b} not within {:#b}", o.tag, b))
    })
}

fn widen(inputs: &RunInputs, k: &Kernel, rng: &mut impl Rng) -> RunInputs {
    let mut w = inputs.clone();
    for t in w.tags.values_mut() {
        *t |= random_tag(k.tag_width, rng);
    }
    for ts in w.memory_tags.values_mut() {
        for t in ts {
            *t |= random_tag(k.tag_width, rng);
        }
    }
    w
}

/// Checks the four tag properties on `trials` seeded random input sets:
/// untainted closure, union monotonicity, precise within union, and fine
/// within coarse (outputs and checkpoint observations).
pub fn fuzz_properties(k: &Kernel, trials: usize, seed: u64) -> Result<PropertyReport> {
    fuzz_properties_with(k, trials, seed, &PropagationRule::FineUnion)
}

/// As [`fuzz_properties`], with `union` standing in for the union rule.
pub fn fuzz_properties_with(
    k: &Kernel,
    trials: usize,
    seed: u64,
    union: &dyn TagPropagation,
) -> Result<PropertyReport> {
    let runner = Runner { k, union };
    let fine_union = DiftMode::Fine(PropagationRule::FineUnion);
    let fine_precise = DiftMode::Fine(PropagationRule::FinePrecise);
    let mut props: Vec<PropertyOutcome> = [UNTAINTED_CLOSURE, UNION_MONOTONICITY, PRECISE_WITHIN_UNION, FINE_WITHIN_COARSE]
        .into_iter()
        .map(|name| PropertyOutcome {
            name,
            checked: 0,
            violations: 0,
            counterexample: None,
        })
        .collect();
    let mut record = |idx: usize, trial: usize, inputs: &RunInputs, violation: Option<String>| {
        let p = &mut props[idx];
        p.checked += 1;
        if let Some(detail) = violation {
            p.violations += 1;
            p.counterexample.get_or_insert_with(|| Counterexample {
                trial,
                inputs: inputs.clone(),
                detail,
            });
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faulted = 0;
    for trial in 0..trials {
        let inputs = random_inputs(k, TagChoice::Random, &mut rng)?;
        let widened = widen(&inputs, k, &mut rng);
        let union = match runner.run(&inputs, fine_union) {
            Ok(r) => r,
            Err(e) if e.is_evaluation() => {
                faulted += 1;
                continue;
            }
            Err(e) => return Err(e),
        };

        let clean = inputs.untainted(k);
        let violation = [fine_union, fine_precise, DiftMode::CoarseBoundary]
            .into_iter()
            .find_map(|mode| {
                let r = runner.run(&clean, mode).ok()?;
                let tainted = r.outputs.iter().find(|(_, o)| o.tag != 0);
                match (tainted, r.exceptions.first()) {
                    (Some((id, o)), _) => Some(format!("{}: output `{id}` has tag {:#b}", mode.name(), o.tag)),
                    (None, Some(e)) => Some(format!("{}: {e}", mode.name())),
                    (None, None) => None,
                }
            });
        record(0, trial, &clean, violation);

        let violation = runner
            .run(&widened, fine_union)
            .ok()
            .and_then(|wide| output_not_within(&union, &wide).map(|d| format!("widening lost taint: {d}")));
        record(1, trial, &inputs, violation);

        let precise = runner.run(&inputs, fine_precise)?;
        let violation = output_not_within(&precise, &union);
        record(2, trial, &inputs, violation);

        let coarse = runner.run(&inputs, DiftMode::CoarseBoundary)?;
        let violation = [&union, &precise].into_iter().find_map(|fine| {
            output_not_within(fine, &coarse).or_else(|| {
                fine.observations
                    .iter()
                    .find(|o| !subset(o.tag, coarse.boundary))
                    .map(|o| format!("checkpoint `{}`: tag {:#b} not within boundary", o.checkpoint_id, o.tag))
            })
        });
        record(3, trial, &inputs, violation);
    }

    Ok(PropertyReport {
        trials,
        faulted,
        properties: props,
    })
}
