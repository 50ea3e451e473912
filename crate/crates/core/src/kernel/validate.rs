// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};

use crate::bitvalue::{BitType, OpKind};
use crate::monitor::PolicyKind;
use crate::taint::MAX_TAG_WIDTH;

use super::{Def, Diagnostic, Kernel, Location};

fn valid_ident(id: &str) -> bool {
    let mut chars = id.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn tag_fits(bits: u32, width: u8) -> bool {
    width >= 32 || bits >> width == 0
}

struct Checker<'k> {
    k: &'k Kernel,
    defs: HashMap<&'k str, Def>,
    diags: Vec<Diagnostic>,
}

impl<'k> Checker<'k> {
    fn err(&mut self, id: &str, msg: impl Into<String>) {
        self.diags.push(Diagnostic::at(id, msg));
    }

    fn warn(&mut self, id: &str, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(Location::Id(id.to_string()), msg));
    }

    fn check_type(&mut self, id: &str, width: u32, signed: bool) {
        if let Err(e) = BitType::new(width, signed) {
            self.err(id, e.to_string());
        }
    }

    fn check_tag(&mut self, id: &str, what: &str, bits: u32) {
        if !tag_fits(bits, self.k.tag_width) {
            self.err(
                id,
                format!("{what} {bits:#b} does not fit in tag width {}", self.k.tag_width),
            );
        }
    }

    fn ids(&mut self) {
        let k = self.k;
        let mut seen = HashSet::new();
        let value_ids = k
            .inputs
            .iter()
            .map(|d| &d.id)
            .chain(k.constants.iter().map(|d| &d.id))
            .chain(k.memories.iter().map(|d| &d.id))
            .chain(k.nodes.iter().map(|d| &d.id));
        for id in value_ids {
            if !valid_ident(id) {
                self.err(id, "ids must be identifiers ([A-Za-z_][A-Za-z0-9_]*)");
            }
            if !seen.insert(id.as_str()) {
                self.err(id, "duplicate id");
            }
        }
        let groups: [(&str, Vec<&String>); 3] = [
            ("checkpoint", k.checkpoints.iter().map(|c| &c.id).collect()),
            ("output", k.outputs.iter().map(|o| &o.id).collect()),
            ("policy", k.policies.iter().map(|p| &p.name).collect()),
        ];
        for (what, ids) in groups {
            let mut seen = HashSet::new();
            for id in ids {
                if !valid_ident(id) {
                    self.err(id, format!("{what} ids must be identifiers"));
                }
                if !seen.insert(id.as_str()) {
                    self.err(id, format!("duplicate {what} id"));
                }
            }
        }
    }

    fn declarations(&mut self) {
        let k = self.k;
        for d in &k.inputs {
            self.check_type(&d.id, d.width, d.signed);
            self.check_tag(&d.id, "default_tag", d.default_tag);
        }
        for d in &k.constants {
            self.check_type(&d.id, d.width, d.signed);
        }
        for d in &k.memories {
            self.check_type(&d.id, d.width, d.signed);
            if d.size == 0 {
                self.err(&d.id, "memory size must be at least 1");
            }
            if d.init.as_ref().is_some_and(|v| v.len() > d.size) {
                self.err(&d.id, format!("init has more than {} cells", d.size));
            }
            if let Some(tags) = &d.init_tags {
                if tags.len() > d.size {
                    self.err(&d.id, format!("init_tags has more than {} cells", d.size));
                }
                for &t in tags {
                    self.check_tag(&d.id, "init tag", t);
                }
            }
        }
        for p in &k.policies {
            match (p.kind, p.mask) {
                (PolicyKind::DenyIfMask, None) => self.err(&p.name, "deny_if_mask policy needs a mask"),
                (PolicyKind::DenyIfMask, Some(m)) => self.check_tag(&p.name, "mask", m),
                (_, Some(_)) => self.warn(&p.name, "mask is ignored for this policy kind"),
                _ => {}
            }
        }
    }

    /// Checks that `arg` names a value wire defined before node `at`
    /// (`None` means outside the node list).
    fn value_ref(&mut self, owner: &str, arg: &str, at: Option<usize>) {
        match self.defs.get(arg).copied() {
            None => self.err(owner, format!("reference to undefined id `{arg}`")),
            Some(Def::Memory(_)) => self.err(owner, format!("`{arg}` is a memory, not a value")),
            Some(Def::Node(j)) => {
                if at.is_some_and(|i| j >= i) {
                    self.err(owner, format!("`{arg}` is used before it is defined"));
                } else if self.k.nodes[j].op == OpKind::Store {
                    self.err(owner, format!("`{arg}` is a store and produces no value"));
                }
            }
            Some(_) => {}
        }
    }

    fn nodes(&mut self) {
        let k = self.k;
        for (i, n) in k.nodes.iter().enumerate() {
            let id = n.id.as_str();
            if n.args.len() != n.op.arity() {
                self.err(
                    id,
                    format!("`{}` expects {} argument(s), got {}", n.op, n.op.arity(), n.args.len()),
                );
                continue;
            }
            if let Some(mem) = n.memory_arg() {
                if !matches!(self.defs.get(mem), Some(Def::Memory(_))) {
                    self.err(id, format!("`{mem}` is not a declared memory"));
                }
            }
            for a in n.value_args() {
                self.value_ref(id, a, Some(i));
            }
            match (n.op, n.width) {
                (OpKind::Store, _) => {
                    if n.width.is_some() || n.signed.is_some() {
                        self.err(id, "store has no result type");
                    }
                }
                (_, None) => self.err(id, "missing result width"),
                (op, Some(w)) => {
                    let signed = n.signed.unwrap_or(false);
                    self.check_type(id, w, signed);
                    if op.is_comparison() && (w != 1 || signed) {
                        self.err(id, format!("comparison `{op}` must have a u1 result"));
                    }
                }
            }
        }
    }

    fn roots(&mut self) {
        let k = self.k;
        let policies: HashSet<&str> = k.policies.iter().map(|p| p.name.as_str()).collect();
        for cp in &k.checkpoints {
            self.value_ref(&cp.id, &cp.arg, None);
            if !policies.contains(cp.policy.as_str()) {
                self.err(&cp.id, format!("unknown policy `{}`", cp.policy));
            }
        }
        for o in &k.outputs {
            self.value_ref(&o.id, &o.source, None);
        }
    }
}

/// Checks every structural rule of a kernel. An empty error set is the
/// precondition of every pass and of simulation.
pub fn validate(k: &Kernel) -> Vec<Diagnostic> {
    let mut c = Checker {
        k,
        defs: k.definitions(),
        diags: Vec::new(),
    };
    if !(1..=MAX_TAG_WIDTH).contains(&k.tag_width) {
        c.diags.push(Diagnostic::error(
            Location::Kernel,
            format!("tag_width {} is outside 1..={MAX_TAG_WIDTH}", k.tag_width),
        ));
    }
    c.ids();
    c.declarations();
    c.nodes();
    c.roots();
    c.diags
}
