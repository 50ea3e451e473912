// SPDX-License-Identifier: Apache-2.0

//! Straight-line dataflow kernels.
//!
//! A kernel is the annotated accelerator function: typed inputs with default
//! tags, constants, memories, an ordered list of operation nodes in SSA form,
//! security policies, the checkpoints that consult them, and named outputs.
//! The JSON kernel file maps one-to-one onto these structures.

mod dot;
mod graph;
mod passes;
mod validate;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitvalue::{BitType, BitValue, OpKind};
use crate::error::{Error, Result};
use crate::monitor::{Policy, PolicyKind};
use crate::taint::Tag;

pub use dot::emit_dot;
pub use graph::{instrument, BOUNDARY_ID, MONITOR_ID, EdgeKind, Graph, GraphEdge, GraphNode, InstrumentedGraph, NodeRole};
pub use passes::{const_fold, dead_code_elim, optimize};
pub use validate::validate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernel {
    pub name: String,
    pub tag_width: u8,
    #[serde(default)]
    pub inputs: Vec<InputDecl>,
    #[serde(default)]
    pub constants: Vec<ConstDecl>,
    #[serde(default)]
    pub memories: Vec<MemoryDecl>,
    #[serde(default)]
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub policies: Vec<PolicyDecl>,
    #[serde(default)]
    pub checkpoints: Vec<CheckpointDecl>,
    #[serde(default)]
    pub outputs: Vec<OutputDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDecl {
    pub id: String,
    pub width: u32,
    #[serde(default)]
    pub signed: bool,
    #[serde(default)]
    pub default_tag: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstDecl {
    pub id: String,
    pub width: u32,
    #[serde(default)]
    pub signed: bool,
    pub value: i128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryDecl {
    pub id: String,
    pub size: usize,
    pub width: u32,
    #[serde(default)]
    pub signed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<i128>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_tags: Option<Vec<u32>>,
}

/// One operation. Argument order: `load [memory, address]`,
/// `store [memory, address, value]`, `mux [sel, t, f]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub op: OpKind,
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDecl {
    pub name: String,
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointDecl {
    pub id: String,
    pub arg: String,
    pub policy: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDecl {
    pub id: String,
    pub source: String,
}

impl InputDecl {
    pub fn ty(&self) -> Result<BitType> {
        BitType::new(self.width, self.signed)
    }
}

impl ConstDecl {
    pub fn ty(&self) -> Result<BitType> {
        BitType::new(self.width, self.signed)
    }

    pub fn bit_value(&self) -> Result<BitValue> {
        Ok(BitValue::new(self.ty()?, self.value))
    }
}

impl MemoryDecl {
    pub fn cell_ty(&self) -> Result<BitType> {
        BitType::new(self.width, self.signed)
    }
}

impl Node {
    /// `None` for stores.
    pub fn result_ty(&self) -> Result<Option<BitType>> {
        match self.width {
            Some(w) => Ok(Some(BitType::new(w, self.signed.unwrap_or(false))?)),
            None => Ok(None),
        }
    }

    /// Arguments that are value wires (memory names excluded).
    pub fn value_args(&self) -> &[String] {
        if self.op.is_memory() {
            &self.args[1.min(self.args.len())..]
        } else {
            &self.args
        }
    }

    pub fn memory_arg(&self) -> Option<&str> {
        if self.op.is_memory() {
            self.args.first().map(String::as_str)
        } else {
            None
        }
    }
}

impl PolicyDecl {
    pub fn to_policy(&self, tag_width: u8) -> Result<Policy> {
        Ok(match self.kind {
            PolicyKind::AllowAll => Policy::allow_all(&self.name),
            PolicyKind::DenyIfAny => Policy::deny_if_any(&self.name),
            PolicyKind::DenyIfMask => {
                let mask = self
                    .mask
                    .ok_or_else(|| Error::InvalidKernel(format!("policy `{}` needs a mask", self.name)))?;
                Policy::deny_if_mask(&self.name, Tag::new(tag_width, mask as u64)?)
            }
        })
    }
}

/// What a value-namespace id names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Def {
    Input(usize),
    Const(usize),
    Memory(usize),
    Node(usize),
}

impl Kernel {
    /// Index of every input, constant, memory, and node id. The first
    /// definition wins when ids collide (the validator reports those).
    pub fn definitions(&self) -> HashMap<&str, Def> {
        let mut defs = HashMap::new();
        let all = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), Def::Input(i)))
            .chain(self.constants.iter().enumerate().map(|(i, d)| (d.id.as_str(), Def::Const(i))))
            .chain(self.memories.iter().enumerate().map(|(i, d)| (d.id.as_str(), Def::Memory(i))))
            .chain(self.nodes.iter().enumerate().map(|(i, d)| (d.id.as_str(), Def::Node(i))));
        for (id, def) in all {
            defs.entry(id).or_insert(def);
        }
        defs
    }

    pub fn tag_zero(&self) -> Result<Tag> {
        Tag::untainted(self.tag_width)
    }

    pub fn policies(&self) -> Result<Vec<Policy>> {
        self.policies.iter().map(|p| p.to_policy(self.tag_width)).collect()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel serializes")
    }

    /// Number of nodes executed before each checkpoint fires.
    ///
    /// A checkpoint fires once its argument is available and after every
    /// checkpoint declared before it, so checkpoints are observed in
    /// declaration order. Arguments defined outside the node list are
    /// available at step 0; the result of node `i` at step `i + 1`.
    pub fn checkpoint_schedule(&self) -> Vec<usize> {
        let defs = self.definitions();
        let mut at = 0;
        self.checkpoints
            .iter()
            .map(|cp| {
                let ready = match defs.get(cp.arg.as_str()) {
                    Some(Def::Node(i)) => i + 1,
                    _ => 0,
                };
                at = at.max(ready);
                at
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line { line: usize, column: usize },
    Id(String),
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            location,
            message: message.into(),
        }
    }

    pub fn warning(location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            location,
            message: message.into(),
        }
    }

    pub fn at(id: &str, message: impl Into<String>) -> Self {
        Self::error(Location::Id(id.to_string()), message)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.location {
            Location::Line { line, column } => write!(f, "{sev}: line {line}, column {column}: {}", self.message),
            Location::Id(id) => write!(f, "{sev}: `{id}`: {}", self.message),
            Location::Kernel => write!(f, "{sev}: {}", self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Parses and validates a kernel file. Warnings are dropped on success;
/// call [`validate`] to retrieve them.
pub fn parse_kernel(text: &str) -> std::result::Result<Kernel, Vec<Diagnostic>> {
    let kernel: Kernel = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic::error(
            Location::Line {
                line: e.line(),
                column: e.column(),
            },
            e.to_string(),
        )]
    })?;
    let diags = validate(&kernel);
    if has_errors(&diags) {
        return Err(diags);
    }
    Ok(kernel)
}
