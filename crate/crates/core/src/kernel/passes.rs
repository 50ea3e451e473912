// SPDX-License-Identifier: Apache-2.0

//! Constant folding and dead-code elimination.
//!
//! Both passes preserve output values, output tags, and the sequence of
//! security exceptions of every run. Constants are untainted, so a node whose
//! operands are all constants always carries the untainted tag and can be
//! replaced by a constant. Folded constants keep the id of the node they
//! replace, so checkpoints and outputs that named the node keep resolving.

use std::collections::{HashMap, HashSet};

use crate::bitvalue::{eval_binop, eval_unop, BitValue, OpKind};
use crate::error::Result;

use super::{ConstDecl, Def, Diagnostic, Kernel, Location, Node};

fn fold_node(n: &Node, consts: &HashMap<String, BitValue>) -> Option<Result<BitValue>> {
    if n.op.is_memory() {
        return None;
    }
    let args: Option<Vec<BitValue>> = n.args.iter().map(|a| consts.get(a).copied()).collect();
    let args = args?;
    let ty = match n.result_ty() {
        Ok(Some(ty)) => ty,
        Ok(None) => return None,
        Err(e) => return Some(Err(e)),
    };
    Some(match n.op {
        OpKind::Mux => Ok(if args[0].is_zero() { args[2] } else { args[1] }.cast(ty)),
        op if op.is_unary() => eval_unop(op, args[0], ty),
        op => eval_binop(op, args[0], args[1], ty),
    })
}

/// Replaces every non-memory node whose arguments are all constants by a
/// constant of the same id. Nodes that fail to evaluate (division by zero)
/// stay in place and are reported as warnings.
pub fn const_fold(k: &Kernel) -> (Kernel, Vec<Diagnostic>) {
    let mut out = k.clone();
    let mut diags = Vec::new();
    let mut consts: HashMap<String, BitValue> = k
        .constants
        .iter()
        .filter_map(|c| c.bit_value().ok().map(|v| (c.id.clone(), v)))
        .collect();

    out.nodes.clear();
    for n in &k.nodes {
        match fold_node(n, &consts) {
            Some(Ok(v)) => {
                consts.insert(n.id.clone(), v);
                out.constants.push(ConstDecl {
                    id: n.id.clone(),
                    width: v.ty().width() as u32,
                    signed: v.ty().is_signed(),
                    value: v.to_int(),
                });
            }
            Some(Err(e)) => {
                diags.push(Diagnostic::warning(
                    Location::Id(n.id.clone()),
                    format!("not folded: {e}"),
                ));
                out.nodes.push(n.clone());
            }
            None => out.nodes.push(n.clone()),
        }
    }
    (out, diags)
}

/// Whether executing `n` can raise an evaluation error.
fn may_trap(n: &Node, k: &Kernel, defs: &HashMap<&str, Def>) -> bool {
    let constant = |id: &str| match defs.get(id) {
        Some(Def::Const(i)) => k.constants[*i].bit_value().ok(),
        _ => None,
    };
    match n.op {
        OpKind::Div | OpKind::Mod => !constant(&n.args[1]).is_some_and(|v| !v.is_zero()),
        OpKind::Load => {
            let size = match defs.get(n.args[0].as_str()) {
                Some(Def::Memory(i)) => k.memories[*i].size as i128,
                _ => return true,
            };
            !constant(&n.args[1]).is_some_and(|a| (0..size).contains(&a.to_int()))
        }
        _ => false,
    }
}

/// Removes nodes and constants that no output, checkpoint, or store depends
/// on. Stores, checkpoints, memories, and inputs are never removed, nor are
/// nodes that may raise an evaluation error.
pub fn dead_code_elim(k: &Kernel) -> Kernel {
    let defs = k.definitions();
    let mut live: HashSet<&str> = k
        .outputs
        .iter()
        .map(|o| o.source.as_str())
        .chain(k.checkpoints.iter().map(|c| c.arg.as_str()))
        .collect();

    let mut keep = vec![false; k.nodes.len()];
    for (i, n) in k.nodes.iter().enumerate().rev() {
        if live.contains(n.id.as_str()) || n.op == OpKind::Store || may_trap(n, k, &defs) {
            keep[i] = true;
            live.extend(n.value_args().iter().map(String::as_str));
        }
    }

    let mut out = k.clone();
    out.nodes = k
        .nodes
        .iter()
        .zip(&keep)
        .filter(|(_, &kept)| kept)
        .map(|(n, _)| n.clone())
        .collect();
    out.constants.retain(|c| live.contains(c.id.as_str()));
    out
}

/// `dead_code_elim(const_fold(k))`.
pub fn optimize(k: &Kernel) -> (Kernel, Vec<Diagnostic>) {
    let (folded, diags) = const_fold(k);
    (dead_code_elim(&folded), diags)
}
