// SPDX-License-Identifier: Apache-2.0

//! Kernel execution.
//!
//! [`run_baseline`] is the untagged accelerator: values only, checkpoints are
//! no-ops. [`run_dift`] is the instrumented accelerator: every wire and
//! memory cell carries a tag, and checkpoints consult the monitor. The two
//! share no evaluation code beyond the bit-accurate operators, so comparing
//! them checks that tracking never perturbs the computation.

mod consistency;
mod fuzz;
mod inputs;
mod oracle;
mod report;

use std::collections::{BTreeMap, HashMap};

use crate::bitvalue::{eval_binop, eval_unop, BitValue, OpKind};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, Node};
use crate::monitor::{MonitorState, SecurityException};
use crate::taint::{boundary_tag, DiftMode, Tag, TagPropagation};
use crate::tainted::{DiftConfig, DiftValue, OnException};

pub use consistency::{check_consistency, ConsistencyReport, Mismatch};
pub use fuzz::{FINE_WITHIN_COARSE, PRECISE_WITHIN_UNION, UNION_MONOTONICITY, UNTAINTED_CLOSURE, fuzz_properties, fuzz_properties_with, Counterexample, PropertyOutcome, PropertyReport};
pub use inputs::{random_inputs, RunInputs, TagChoice};
pub use oracle::{independence_oracle, ORACLE_WIDTH_CAP};
pub use report::{ExceptionRecord, OutputRecord, ReportFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedOutput {
    pub value: u64,
    pub tag: u32,
}

/// Tag seen by one checkpoint, whether or not it was denied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub checkpoint_id: String,
    pub tag: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    /// Empty when the run halted.
    pub outputs: BTreeMap<String, TaggedOutput>,
    pub exceptions: Vec<SecurityException>,
    pub observations: Vec<Observation>,
    pub irq: bool,
    pub steps_executed: usize,
    pub halted: bool,
    pub mode: DiftMode,
    /// Join of every input and initial memory tag of this run.
    pub boundary: u32,
}

fn at_node(n: &Node, step: usize) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::AtNode {
        node: n.id.clone(),
        step,
        source: Box::new(e),
    }
}

fn cell_index(memory: &str, size: usize, address: BitValue) -> Result<usize> {
    let a = address.to_int();
    if a < 0 || a >= size as i128 {
        return Err(Error::OutOfBoundsAddress {
            memory: memory.to_string(),
            address: a,
            size,
        });
    }
    Ok(a as usize)
}

/// Executes the untagged kernel and returns the output value bits.
pub fn run_baseline(k: &Kernel, inputs: &RunInputs) -> Result<BTreeMap<String, u64>> {
    inputs.check(k)?;
    let mut values: HashMap<&str, BitValue> = HashMap::new();
    for d in &k.inputs {
        let raw = inputs.values.get(&d.id).copied().unwrap_or(0);
        values.insert(&d.id, BitValue::new(d.ty()?, raw));
    }
    for c in &k.constants {
        values.insert(&c.id, c.bit_value()?);
    }
    let mut memories: HashMap<&str, Vec<BitValue>> = HashMap::new();
    for m in &k.memories {
        let ty = m.cell_ty()?;
        let cells = (0..m.size)
            .map(|i| BitValue::new(ty, inputs.memory_value(m, i)))
            .collect();
        memories.insert(&m.id, cells);
    }

    for (i, n) in k.nodes.iter().enumerate() {
        let step = i + 1;
        let arg = |j: usize| values[n.args[j].as_str()];
        let ty = n.result_ty()?;
        let result = match n.op {
            OpKind::Load => {
                let cells = &memories[n.args[0].as_str()];
                let idx = cell_index(&n.args[0], cells.len(), arg(1)).map_err(at_node(n, step))?;
                Some(cells[idx])
            }
            OpKind::Store => {
                let (addr, v) = (arg(1), arg(2));
                let cells = memories.get_mut(n.args[0].as_str()).expect("validated memory");
                let idx = cell_index(&n.args[0], cells.len(), addr).map_err(at_node(n, step))?;
                cells[idx] = v.cast(cells[idx].ty());
                None
            }
            OpKind::Mux => Some(if arg(0).is_zero() { arg(2) } else { arg(1) }),
            op if op.is_unary() => Some(eval_unop(op, arg(0), ty.expect("validated")).map_err(at_node(n, step))?),
            op => Some(eval_binop(op, arg(0), arg(1), ty.expect("validated")).map_err(at_node(n, step))?),
        }
        .map(|v| v.cast(ty.expect("value nodes carry a type")));
        if let Some(v) = result {
            values.insert(&n.id, v);
        }
    }

    Ok(k.outputs
        .iter()
        .map(|o| (o.id.clone(), values[o.source.as_str()].bits()))
        .collect())
}

/// A monitor with every policy of `k` registered.
pub fn monitor_for(k: &Kernel) -> Result<MonitorState> {
    MonitorState::with_policies(k.policies()?)
}

/// Executes the DIFT-instrumented kernel with a fresh monitor.
pub fn run_dift(k: &Kernel, inputs: &RunInputs, cfg: &DiftConfig) -> Result<SimulationReport> {
    let mut monitor = monitor_for(k)?;
    run_dift_with(k, inputs, cfg, &cfg.rule(), &mut monitor)
}

/// Executes the DIFT-instrumented kernel against an existing monitor, using
/// `propagation` for per-operation tags in fine mode.
///
/// Inputs without an explicit tag take the monitor's `REG_TAG_IN` word when
/// it is nonzero, and their declared default tag otherwise.
pub fn run_dift_with(
    k: &Kernel,
    inputs: &RunInputs,
    cfg: &DiftConfig,
    propagation: &dyn TagPropagation,
    monitor: &mut MonitorState,
) -> Result<SimulationReport> {
    if cfg.tag_width != k.tag_width {
        return Err(Error::WidthMismatch {
            left: cfg.tag_width,
            right: k.tag_width,
        });
    }
    inputs.check(k)?;
    let width = k.tag_width;
    let zero = Tag::untainted(width)?;
    let tag_mask = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
    let tag_in = monitor.tag_in() & tag_mask;

    let mut wires: HashMap<&str, DiftValue> = HashMap::new();
    let mut input_tags = Vec::new();
    for d in &k.inputs {
        let raw = inputs.values.get(&d.id).copied().unwrap_or(0);
        let bits = match inputs.tags.get(&d.id) {
            Some(&t) => t,
            None if tag_in != 0 => tag_in,
            None => d.default_tag,
        };
        let tag = Tag::new(width, bits as u64)?;
        input_tags.push(tag);
        wires.insert(
            &d.id,
            DiftValue {
                value: BitValue::new(d.ty()?, raw),
                tag,
            },
        );
    }
    for c in &k.constants {
        wires.insert(
            &c.id,
            DiftValue {
                value: c.bit_value()?,
                tag: zero,
            },
        );
    }
    let mut memories: HashMap<&str, Vec<DiftValue>> = HashMap::new();
    let mut memory_tags = Vec::new();
    for m in &k.memories {
        let ty = m.cell_ty()?;
        let mut cells = Vec::with_capacity(m.size);
        for i in 0..m.size {
            let tag = Tag::new(width, inputs.memory_tag(m, i) as u64)?;
            memory_tags.push(tag);
            cells.push(DiftValue {
                value: BitValue::new(ty, inputs.memory_value(m, i)),
                tag,
            });
        }
        memories.insert(&m.id, cells);
    }
    let boundary = boundary_tag(width, &input_tags, &memory_tags)?;
    let observe = |v: DiftValue| match cfg.mode {
        DiftMode::Fine(_) => v,
        DiftMode::CoarseBoundary => DiftValue {
            value: v.value,
            tag: boundary,
        },
    };

    let schedule = k.checkpoint_schedule();
    let mut next_cp = 0;
    let mut exceptions = Vec::new();
    let mut observations = Vec::new();
    let mut halted_at = None;

    // Fires every checkpoint due at `step`; returns true when the run halts.
    let mut fire = |step: usize,
                    wires: &HashMap<&str, DiftValue>,
                    next_cp: &mut usize,
                    monitor: &mut MonitorState|
     -> Result<bool> {
        while *next_cp < schedule.len() && schedule[*next_cp] == step {
            let cp = &k.checkpoints[*next_cp];
            *next_cp += 1;
            let v = observe(wires[cp.arg.as_str()]);
            observations.push(Observation {
                checkpoint_id: cp.id.clone(),
                tag: v.tag.bits(),
            });
            if let Some(e) = monitor.checkpoint(&cp.id, &cp.policy, &cp.arg, &v, step)? {
                exceptions.push(e);
                if cfg.on_exception == OnException::Halt {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    };

    if fire(0, &wires, &mut next_cp, monitor)? {
        halted_at = Some(0);
    }

    if halted_at.is_none() {
        for (i, n) in k.nodes.iter().enumerate() {
            let step = i + 1;
            let arg = |j: usize| wires[n.args[j].as_str()];
            let ty = n.result_ty()?;
            let result = match n.op {
                OpKind::Load => {
                    let cells = &memories[n.args[0].as_str()];
                    let addr = arg(1);
                    let idx = cell_index(&n.args[0], cells.len(), addr.value).map_err(at_node(n, step))?;
                    let cell = cells[idx];
                    let tag = propagation.load_tag(cell.tag, addr.tag).map_err(at_node(n, step))?;
                    Some(DiftValue { value: cell.value, tag })
                }
                OpKind::Store => {
                    let (addr, v) = (arg(1), arg(2));
                    let tag = propagation.store_tag(v.tag, addr.tag).map_err(at_node(n, step))?;
                    let cells = memories.get_mut(n.args[0].as_str()).expect("validated memory");
                    let idx = cell_index(&n.args[0], cells.len(), addr.value).map_err(at_node(n, step))?;
                    let cell_ty = cells[idx].value.ty();
                    cells[idx] = DiftValue {
                        value: v.value.cast(cell_ty),
                        tag,
                    };
                    None
                }
                op => {
                    let ty = ty.expect("validated value node");
                    let operands: Vec<DiftValue> = (0..op.arity()).map(arg).collect();
                    let value = match op {
                        OpKind::Mux => {
                            if operands[0].value.is_zero() {
                                operands[2].value
                            } else {
                                operands[1].value
                            }
                        }
                        op if op.is_unary() => eval_unop(op, operands[0].value, ty).map_err(at_node(n, step))?,
                        op => eval_binop(op, operands[0].value, operands[1].value, ty).map_err(at_node(n, step))?,
                    };
                    let pairs: Vec<_> = operands.iter().map(|d| (d.value, d.tag)).collect();
                    let tag = propagation.propagate(op, &pairs, ty).map_err(at_node(n, step))?;
                    Some(DiftValue { value, tag })
                }
            };
            if let Some(v) = result {
                let ty = ty.expect("value nodes carry a type");
                wires.insert(
                    &n.id,
                    DiftValue {
                        value: v.value.cast(ty),
                        tag: v.tag,
                    },
                );
            }
            if fire(step, &wires, &mut next_cp, monitor)? {
                halted_at = Some(step);
                break;
            }
        }
    }

    let (outputs, steps_executed) = match halted_at {
        Some(step) => (BTreeMap::new(), step),
        None => {
            let outputs = k
                .outputs
                .iter()
                .map(|o| {
                    let v = observe(wires[o.source.as_str()]);
                    (
                        o.id.clone(),
                        TaggedOutput {
                            value: v.value.bits(),
                            tag: v.tag.bits(),
                        },
                    )
                })
                .collect();
            (outputs, k.nodes.len())
        }
    };

    Ok(SimulationReport {
        outputs,
        exceptions,
        observations,
        irq: monitor.irq(),
        steps_executed,
        halted: halted_at.is_some(),
        mode: cfg.mode,
        boundary: boundary.bits(),
    })
}
