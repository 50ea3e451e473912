// SPDX-License-Identifier: Apache-2.0

//! Graph views of a kernel: the plain value graph and the DIFT-instrumented
//! graph carrying companion tag wires and the security monitor.

use std::collections::BTreeSet;

use crate::bitvalue::OpKind;
use crate::taint::{DiftMode, PropagationRule};
use crate::tainted::DiftConfig;

use super::Kernel;

pub const MONITOR_ID: &str = "monitor";
pub const BOUNDARY_ID: &str = "boundary";
const TAG_PREFIX: &str = "tag:";
const OUT_PREFIX: &str = "out:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRole {
    Input,
    Constant,
    Memory,
    Op(OpKind),
    Output,
    /// Tag wire source for an input, constant, or memory; also the tag
    /// sink of an output.
    Tag { of: String },
    /// Tag-propagation logic paired with one operation node.
    TagOp { of: String, rule: PropagationRule },
    /// Coarse-mode join of every input and memory tag.
    Boundary,
    Monitor,
}

impl NodeRole {
    pub fn is_value(&self) -> bool {
        matches!(
            self,
            NodeRole::Input | NodeRole::Constant | NodeRole::Memory | NodeRole::Op(_) | NodeRole::Output
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub id: String,
    pub role: NodeRole,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    Value,
    Tag,
    /// Tag wire feeding the monitor, one per checkpoint.
    Monitor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub name: String,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

fn tag_id(id: &str) -> String {
    format!("{TAG_PREFIX}{id}")
}

fn out_id(id: &str) -> String {
    format!("{OUT_PREFIX}{id}")
}

impl Graph {
    fn node(&mut self, id: String, role: NodeRole, label: String) {
        self.nodes.push(GraphNode { id, role, label });
    }

    fn edge(&mut self, from: String, to: String, kind: EdgeKind, label: Option<String>) {
        self.edges.push(GraphEdge { from, to, kind, label });
    }

    /// Value nodes and value edges of a kernel.
    pub fn from_kernel(k: &Kernel) -> Graph {
        let mut g = Graph {
            name: k.name.clone(),
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        for d in &k.inputs {
            let label = format!("{}: {}", d.id, ty_label(d.width, d.signed));
            g.node(d.id.clone(), NodeRole::Input, label);
        }
        for d in &k.constants {
            let label = format!("{} = {}", d.id, d.value);
            g.node(d.id.clone(), NodeRole::Constant, label);
        }
        for d in &k.memories {
            let label = format!("{}[{}]: {}", d.id, d.size, ty_label(d.width, d.signed));
            g.node(d.id.clone(), NodeRole::Memory, label);
        }
        for n in &k.nodes {
            let label = match n.width {
                Some(w) => format!("{} = {} : {}", n.id, n.op, ty_label(w, n.signed.unwrap_or(false))),
                None => format!("{} = {}", n.id, n.op),
            };
            g.node(n.id.clone(), NodeRole::Op(n.op), label);
            for a in &n.args {
                g.edge(a.clone(), n.id.clone(), EdgeKind::Value, None);
            }
            if n.op == OpKind::Store {
                g.edge(n.id.clone(), n.args[0].clone(), EdgeKind::Value, None);
            }
        }
        for o in &k.outputs {
            g.node(out_id(&o.id), NodeRole::Output, o.id.clone());
            g.edge(o.source.clone(), out_id(&o.id), EdgeKind::Value, None);
        }
        g
    }

    /// The graph with every tag and monitor node and edge removed.
    pub fn value_subgraph(&self) -> Graph {
        let keep: BTreeSet<&str> = self
            .nodes
            .iter()
            .filter(|n| n.role.is_value())
            .map(|n| n.id.as_str())
            .collect();
        Graph {
            name: self.name.clone(),
            nodes: self.nodes.iter().filter(|n| n.role.is_value()).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| e.kind == EdgeKind::Value && keep.contains(e.from.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Order-independent text form used to compare graphs structurally.
    pub fn canonical(&self) -> String {
        let mut nodes: Vec<String> = self.nodes.iter().map(|n| format!("{} {:?} {}", n.id, n.role, n.label)).collect();
        let mut edges: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("{} -> {} {:?} {:?}", e.from, e.to, e.kind, e.label))
            .collect();
        nodes.sort();
        edges.sort();
        format!("{}\n{}\n{}", self.name, nodes.join("\n"), edges.join("\n"))
    }

    pub fn count(&self, pred: impl Fn(&NodeRole) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.role)).count()
    }

    pub fn edges_into(&self, id: &str) -> impl Iterator<Item = &GraphEdge> {
        let id = id.to_string();
        self.edges.iter().filter(move |e| e.to == id)
    }
}

fn ty_label(width: u32, signed: bool) -> String {
    format!("{}{}", if signed { 's' } else { 'u' }, width)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentedGraph {
    pub graph: Graph,
    pub mode: DiftMode,
}

impl InstrumentedGraph {
    pub fn monitor_in_degree(&self) -> usize {
        self.graph.edges_into(MONITOR_ID).count()
    }

    pub fn op_nodes(&self) -> usize {
        self.graph.count(|r| matches!(r, NodeRole::Op(_)))
    }

    pub fn tag_op_nodes(&self) -> usize {
        self.graph.count(|r| matches!(r, NodeRole::TagOp { .. }))
    }
}

/// Adds the DIFT logic to a validated kernel.
///
/// Fine mode pairs every value wire with a tag wire and every operation with
/// a tag-propagation node using the configured rule. Coarse mode only
/// instruments the component boundary: input and memory tags join in a
/// single boundary node that drives every output tag. In both modes one
/// monitor node receives one tag edge per checkpoint.
pub fn instrument(k: &Kernel, cfg: &DiftConfig) -> InstrumentedGraph {
    let mut g = Graph::from_kernel(k);

    match cfg.mode {
        DiftMode::Fine(rule) => {
            for d in &k.inputs {
                let label = format!("tag {} = {:#b}", d.id, d.default_tag);
                g.node(tag_id(&d.id), NodeRole::Tag { of: d.id.clone() }, label);
            }
            for d in &k.constants {
                g.node(tag_id(&d.id), NodeRole::Tag { of: d.id.clone() }, format!("tag {} = 0", d.id));
            }
            for d in &k.memories {
                g.node(tag_id(&d.id), NodeRole::Tag { of: d.id.clone() }, format!("tags {}[{}]", d.id, d.size));
            }
            for n in &k.nodes {
                let role = NodeRole::TagOp {
                    of: n.id.clone(),
                    rule,
                };
                let label = format!("tag {} = {}({})", n.id, rule, n.op);
                g.node(tag_id(&n.id), role, label);
            }
            for o in &k.outputs {
                let id = out_id(&o.id);
                g.node(tag_id(&id), NodeRole::Tag { of: id.clone() }, format!("tag {}", o.id));
            }
            let mirrored: Vec<GraphEdge> = g.edges.iter().filter(|e| e.kind == EdgeKind::Value).cloned().collect();
            for e in mirrored {
                g.edge(tag_id(&e.from), tag_id(&e.to), EdgeKind::Tag, None);
            }
            g.node(MONITOR_ID.to_string(), NodeRole::Monitor, MONITOR_ID.to_string());
            for cp in &k.checkpoints {
                let label = Some(format!("{} ({})", cp.id, cp.policy));
                g.edge(tag_id(&cp.arg), MONITOR_ID.to_string(), EdgeKind::Monitor, label);
            }
        }
        DiftMode::CoarseBoundary => {
            g.node(BOUNDARY_ID.to_string(), NodeRole::Boundary, "boundary join".to_string());
            for d in &k.inputs {
                let label = format!("tag {} = {:#b}", d.id, d.default_tag);
                g.node(tag_id(&d.id), NodeRole::Tag { of: d.id.clone() }, label);
                g.edge(tag_id(&d.id), BOUNDARY_ID.to_string(), EdgeKind::Tag, None);
            }
            for d in &k.memories {
                g.node(tag_id(&d.id), NodeRole::Tag { of: d.id.clone() }, format!("tags {}[{}]", d.id, d.size));
                g.edge(tag_id(&d.id), BOUNDARY_ID.to_string(), EdgeKind::Tag, None);
            }
            for o in &k.outputs {
                let id = out_id(&o.id);
                g.node(tag_id(&id), NodeRole::Tag { of: id.clone() }, format!("tag {}", o.id));
                g.edge(BOUNDARY_ID.to_string(), tag_id(&id), EdgeKind::Tag, None);
            }
            g.node(MONITOR_ID.to_string(), NodeRole::Monitor, MONITOR_ID.to_string());
            for cp in &k.checkpoints {
                let label = Some(format!("{} ({})", cp.id, cp.policy));
                g.edge(BOUNDARY_ID.to_string(), MONITOR_ID.to_string(), EdgeKind::Monitor, label);
            }
        }
    }

    InstrumentedGraph { graph: g, mode: cfg.mode }
}
