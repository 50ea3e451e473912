// SPDX-License-Identifier: Apache-2.0

//! Security checkpoints and the monitor that evaluates them.
//!
//! One [`MonitorState`] serves every checkpoint of a kernel. A denying
//! checkpoint queues a [`SecurityException`], raises the interrupt flag and
//! mirrors the event into a small memory-mapped register file that host
//! software reads and clears.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taint::Tag;
use crate::tainted::DiftValue;

pub const REG_STATUS: u32 = 0;
pub const REG_EXC_COUNT: u32 = 1;
pub const REG_TAG_IN: u32 = 2;
pub const REG_TAG_OUT: u32 = 3;

/// Bit 0 of `REG_STATUS`: interrupt pending. Writing it clears the monitor.
pub const STATUS_IRQ: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    AllowAll,
    DenyIfAny,
    DenyIfMask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub name: String,
    pub kind: PolicyKind,
    /// Only consulted by `DenyIfMask`.
    pub mask: Option<Tag>,
}

impl Policy {
    pub fn allow_all(name: impl Into<String>) -> Self {
        Policy {
            name: name.into(),
            kind: PolicyKind::AllowAll,
            mask: None,
        }
    }

    pub fn deny_if_any(name: impl Into<String>) -> Self {
        Policy {
            name: name.into(),
            kind: PolicyKind::DenyIfAny,
            mask: None,
        }
    }

    pub fn deny_if_mask(name: impl Into<String>, mask: Tag) -> Self {
        Policy {
            name: name.into(),
            kind: PolicyKind::DenyIfMask,
            mask: Some(mask),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Allow,
    Deny,
}

pub fn evaluate_policy(p: &Policy, t: Tag) -> Result<Verdict> {
    let deny = match p.kind {
        PolicyKind::AllowAll => false,
        PolicyKind::DenyIfAny => t.is_tainted(),
        PolicyKind::DenyIfMask => {
            let mask = p
                .mask
                .ok_or_else(|| Error::InvalidKernel(format!("policy `{}` has no mask", p.name)))?;
            if mask.width() != t.width() {
                return Err(Error::WidthMismatch {
                    left: mask.width(),
                    right: t.width(),
                });
            }
            t.bits() & mask.bits() != 0
        }
    };
    Ok(if deny { Verdict::Deny } else { Verdict::Allow })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SecurityException {
    pub checkpoint_id: String,
    pub node_id: String,
    pub tag_bits: u32,
    pub step: usize,
    pub policy_name: String,
}

impl fmt::Display for SecurityException {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "checkpoint `{}` on `{}` denied by `{}` (tag {:#b}, step {})",
            self.checkpoint_id, self.node_id, self.policy_name, self.tag_bits, self.step
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegisterFile {
    status: u32,
    exc_count: u32,
    tag_in: u32,
    tag_out: u32,
}

#[derive(Debug, Clone, Default)]
pub struct MonitorState {
    policies: BTreeMap<String, Policy>,
    exceptions: VecDeque<SecurityException>,
    irq: bool,
    registers: RegisterFile,
}

impl MonitorState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_policies(policies: impl IntoIterator<Item = Policy>) -> Result<Self> {
        let mut m = Self::new();
        for p in policies {
            m.register_policy(p)?;
        }
        Ok(m)
    }

    pub fn register_policy(&mut self, p: Policy) -> Result<()> {
        if self.policies.contains_key(&p.name) {
            return Err(Error::DuplicatePolicy(p.name));
        }
        self.policies.insert(p.name.clone(), p);
        Ok(())
    }

    pub fn policy(&self, name: &str) -> Option<&Policy> {
        self.policies.get(name)
    }

    pub fn irq(&self) -> bool {
        self.irq
    }

    pub fn exceptions(&self) -> impl Iterator<Item = &SecurityException> {
        self.exceptions.iter()
    }

    pub fn pending(&self) -> usize {
        self.exceptions.len()
    }

    /// Word last written to `REG_TAG_IN` by host software.
    pub fn tag_in(&self) -> u32 {
        self.registers.tag_in
    }

    /// Submits `v`'s tag to `policy_name`. The value itself is never touched.
    pub fn checkpoint(
        &mut self,
        checkpoint_id: &str,
        policy_name: &str,
        node_id: &str,
        v: &DiftValue,
        step: usize,
    ) -> Result<Option<SecurityException>> {
        let policy = self
            .policies
            .get(policy_name)
            .ok_or_else(|| Error::UnknownPolicy(policy_name.to_string()))?;
        if evaluate_policy(policy, v.tag)? == Verdict::Allow {
            return Ok(None);
        }
        let exc = SecurityException {
            checkpoint_id: checkpoint_id.to_string(),
            node_id: node_id.to_string(),
            tag_bits: v.tag.bits(),
            step,
            policy_name: policy.name.clone(),
        };
        self.exceptions.push_back(exc.clone());
        self.registers.tag_out = v.tag.bits();
        self.sync();
        Ok(Some(exc))
    }

    pub fn reg_read(&self, addr: u32) -> Result<u32> {
        match addr {
            REG_STATUS => Ok(self.registers.status),
            REG_EXC_COUNT => Ok(self.registers.exc_count),
            REG_TAG_IN => Ok(self.registers.tag_in),
            REG_TAG_OUT => Ok(self.registers.tag_out),
            _ => Err(Error::BadAddress(addr)),
        }
    }

    /// `REG_EXC_COUNT` and `REG_TAG_OUT` are read-only; writes to them are
    /// ignored.
    pub fn reg_write(&mut self, addr: u32, word: u32) -> Result<()> {
        match addr {
            REG_STATUS => {
                if word & STATUS_IRQ != 0 {
                    self.exceptions.clear();
                    self.sync();
                }
            }
            REG_EXC_COUNT | REG_TAG_OUT => {}
            REG_TAG_IN => self.registers.tag_in = word,
            _ => return Err(Error::BadAddress(addr)),
        }
        Ok(())
    }

    pub fn drain_exceptions(&mut self) -> Vec<SecurityException> {
        let out = self.exceptions.drain(..).collect();
        self.sync();
        out
    }

    fn sync(&mut self) {
        self.irq = !self.exceptions.is_empty();
        self.registers.status = if self.irq { STATUS_IRQ } else { 0 };
        self.registers.exc_count = self.exceptions.len() as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvalue::{make_bitvalue, BitType};

    fn tag(bits: u64) -> Tag {
        Tag::new(2, bits).unwrap()
    }

    fn dv(t: u64) -> DiftValue {
        DiftValue {
            value: make_bitvalue(BitType::unsigned(8).unwrap(), 42),
            tag: tag(t),
        }
    }

    fn monitor() -> MonitorState {
        MonitorState::with_policies([
            Policy::deny_if_any("any"),
            Policy::deny_if_mask("low", tag(0b01)),
            Policy::allow_all("open"),
        ])
        .unwrap()
    }

    #[test]
    fn policy_verdicts() {
        assert_eq!(evaluate_policy(&Policy::deny_if_any("p"), tag(0)).unwrap(), Verdict::Allow);
        assert_eq!(evaluate_policy(&Policy::deny_if_any("p"), tag(2)).unwrap(), Verdict::Deny);
        let m = Policy::deny_if_mask("p", tag(1));
        assert_eq!(evaluate_policy(&m, tag(2)).unwrap(), Verdict::Allow);
        assert_eq!(evaluate_policy(&m, tag(3)).unwrap(), Verdict::Deny);
        assert_eq!(evaluate_policy(&Policy::allow_all("p"), tag(3)).unwrap(), Verdict::Allow);
        let e = evaluate_policy(&m, Tag::new(3, 1).unwrap());
        assert!(matches!(e, Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn allow_leaves_state_unchanged() {
        let mut m = monitor();
        assert_eq!(m.checkpoint("cp", "any", "x", &dv(0), 3).unwrap(), None);
        assert!(!m.irq());
        assert_eq!(m.reg_read(REG_STATUS).unwrap(), 0);
        assert_eq!(m.reg_read(REG_EXC_COUNT).unwrap(), 0);
    }

    #[test]
    fn deny_queues_exception_and_raises_irq() {
        let mut m = monitor();
        let v = dv(1);
        let e = m.checkpoint("cp", "any", "x", &v, 7).unwrap().unwrap();
        assert_eq!((e.tag_bits, e.step), (1, 7));
        assert!(m.irq());
        assert_eq!(m.reg_read(REG_EXC_COUNT).unwrap(), 1);
        assert_eq!(m.reg_read(REG_STATUS).unwrap(), STATUS_IRQ);
        assert_eq!(m.reg_read(REG_TAG_OUT).unwrap(), 1);
        assert_eq!(v, dv(1));
    }

    #[test]
    fn unknown_policy() {
        let mut m = monitor();
        let e = m.checkpoint("cp", "nope", "x", &dv(1), 0);
        assert_eq!(e, Err(Error::UnknownPolicy("nope".into())));
    }

    #[test]
    fn duplicate_policy_rejected() {
        let mut m = monitor();
        assert!(m.register_policy(Policy::allow_all("any")).is_err());
    }

    #[test]
    fn status_write_clears() {
        let mut m = monitor();
        m.checkpoint("cp", "any", "x", &dv(2), 1).unwrap();
        m.reg_write(REG_STATUS, STATUS_IRQ).unwrap();
        assert_eq!(m.reg_read(REG_STATUS).unwrap(), 0);
        assert_eq!(m.pending(), 0);
        assert!(!m.irq());
    }

    #[test]
    fn status_write_without_bit0_is_noop() {
        let mut m = monitor();
        m.checkpoint("cp", "any", "x", &dv(2), 1).unwrap();
        m.reg_write(REG_STATUS, 0b10).unwrap();
        assert_eq!(m.pending(), 1);
    }

    #[test]
    fn tag_in_register_round_trips() {
        let mut m = monitor();
        m.reg_write(REG_TAG_IN, 0b11).unwrap();
        assert_eq!(m.reg_read(REG_TAG_IN).unwrap(), 0b11);
        assert_eq!(m.tag_in(), 0b11);
        m.reg_write(REG_EXC_COUNT, 9).unwrap();
        assert_eq!(m.reg_read(REG_EXC_COUNT).unwrap(), 0);
    }

    #[test]
    fn bad_address() {
        let mut m = monitor();
        assert_eq!(m.reg_read(4), Err(Error::BadAddress(4)));
        assert_eq!(m.reg_write(17, 0), Err(Error::BadAddress(17)));
    }

    #[test]
    fn drain_preserves_order() {
        let mut m = monitor();
        assert!(m.drain_exceptions().is_empty());
        for (i, cp) in ["a", "b", "c"].iter().enumerate() {
            m.checkpoint(cp, "low", "x", &dv(1), i).unwrap();
        }
        let ids: Vec<_> = m.drain_exceptions().into_iter().map(|e| e.checkpoint_id).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(!m.irq());
        assert_eq!(m.reg_read(REG_EXC_COUNT).unwrap(), 0);
    }
}
