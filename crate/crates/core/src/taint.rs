// SPDX-License-Identifier: Apache-2.0

//! Taint tags and the propagation-rule algebra.
//!
//! A [`Tag`] is a fixed-width bitset of independent labels. Tags form a
//! join-semilattice under bitwise OR with the all-zero tag (untainted) as
//! identity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitvalue::{BitType, BitValue, OpKind};
use crate::error::{Error, Result};

pub const MAX_TAG_WIDTH: u8 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tag {
    width: u8,
    bits: u32,
}

impl Tag {
    pub fn new(width: u8, bits: u64) -> Result<Self> {
        check_tag_width(width)?;
        if bits > mask(width) as u64 {
            return Err(Error::TagOutOfRange { bits, width });
        }
        Ok(Tag {
            width,
            bits: bits as u32,
        })
    }

    pub fn untainted(width: u8) -> Result<Self> {
        Self::new(width, 0)
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_tainted(&self) -> bool {
        self.bits != 0
    }

    /// Bitwise subset test.
    pub fn is_subset_of(&self, other: &Tag) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn join(&self, other: &Tag) -> Result<Tag> {
        join(*self, *other)
    }

    fn cleared(&self) -> Tag {
        Tag {
            width: self.width,
            bits: 0,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#0w$b}", self.bits, w = self.width as usize + 2)
    }
}

pub fn check_tag_width(width: u8) -> Result<()> {
    if !(1..=MAX_TAG_WIDTH).contains(&width) {
        return Err(Error::InvalidType {
            width: width as u32,
            min: 1,
            max: MAX_TAG_WIDTH as u32,
        });
    }
    Ok(())
}

fn mask(width: u8) -> u32 {
    if width == 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

fn same_width(a: &Tag, b: &Tag) -> Result<()> {
    if a.width != b.width {
        return Err(Error::WidthMismatch {
            left: a.width,
            right: b.width,
        });
    }
    Ok(())
}

pub fn join(a: Tag, b: Tag) -> Result<Tag> {
    same_width(&a, &b)?;
    Ok(Tag {
        width: a.width,
        bits: a.bits | b.bits,
    })
}

fn join_all<'a>(first: Tag, rest: impl IntoIterator<Item = &'a Tag>) -> Result<Tag> {
    rest.into_iter().try_fold(first, |acc, t| join(acc, *t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropagationRule {
    /// Result tag is the join of every operand tag.
    FineUnion,
    /// Union, except where an untainted operand value provably fixes the
    /// result: `x * 0`, `x & 0`, `x | all-ones`, and a mux whose untainted
    /// selector rules out one branch.
    FinePrecise,
}

impl PropagationRule {
    pub fn name(self) -> &'static str {
        match self {
            PropagationRule::FineUnion => "union",
            PropagationRule::FinePrecise => "precise",
        }
    }
}

impl fmt::Display for PropagationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiftMode {
    Fine(PropagationRule),
    /// Tags are computed once at the component boundary and observed by
    /// every output and checkpoint.
    CoarseBoundary,
}

impl DiftMode {
    pub fn name(self) -> &'static str {
        match self {
            DiftMode::Fine(_) => "fine",
            DiftMode::CoarseBoundary => "coarse",
        }
    }

    pub fn rule(self) -> Option<PropagationRule> {
        match self {
            DiftMode::Fine(r) => Some(r),
            DiftMode::CoarseBoundary => None,
        }
    }
}

/// How a result tag is derived from operand values and tags.
///
/// [`PropagationRule`] is the production implementation; the trait exists so
/// test harnesses can substitute deliberately faulty rules.
pub trait TagPropagation {
    fn propagate(&self, kind: OpKind, operands: &[(BitValue, Tag)], result_ty: BitType) -> Result<Tag>;

    /// Tag written into a memory cell by a store.
    fn store_tag(&self, value_tag: Tag, address_tag: Tag) -> Result<Tag>;

    /// Tag produced by a load.
    fn load_tag(&self, cell_tag: Tag, address_tag: Tag) -> Result<Tag> {
        join(cell_tag, address_tag)
    }
}

impl TagPropagation for PropagationRule {
    fn propagate(&self, kind: OpKind, operands: &[(BitValue, Tag)], result_ty: BitType) -> Result<Tag> {
        propagate(*self, kind, operands, result_ty)
    }

    fn store_tag(&self, value_tag: Tag, address_tag: Tag) -> Result<Tag> {
        match self {
            PropagationRule::FineUnion => join(value_tag, address_tag),
            PropagationRule::FinePrecise => {
                same_width(&value_tag, &address_tag)?;
                Ok(value_tag)
            }
        }
    }
}

/// Computes the result tag of `kind` applied to `operands`.
///
/// `result_ty` decides which result bits are observable, which the `or`
/// kill needs: an untainted operand fixes `x | c` only if `c` covers every
/// bit of the result.
pub fn propagate(
    rule: PropagationRule,
    kind: OpKind,
    operands: &[(BitValue, Tag)],
    result_ty: BitType,
) -> Result<Tag> {
    if kind.is_memory() {
        return Err(Error::UnsupportedOp(kind));
    }
    if operands.len() != kind.arity() {
        return Err(Error::ArityMismatch {
            op: kind,
            expected: kind.arity(),
            got: operands.len(),
        });
    }
    let first = operands[0].1;
    let union = join_all(first, operands[1..].iter().map(|(_, t)| t))?;

    if rule == PropagationRule::FineUnion {
        return Ok(union);
    }

    let untainted = |(_, t): &&(BitValue, Tag)| !t.is_tainted();
    let killed = match kind {
        OpKind::Mul | OpKind::And => operands.iter().filter(untainted).any(|(v, _)| v.is_zero()),
        OpKind::Or => operands
            .iter()
            .filter(untainted)
            .any(|(v, _)| v.cast(result_ty).is_all_ones()),
        OpKind::Mux => {
            let (sel, sel_tag) = operands[0];
            let chosen = if sel.is_zero() { &operands[2] } else { &operands[1] };
            return join(sel_tag, chosen.1);
        }
        _ => false,
    };
    Ok(if killed { union.cleared() } else { union })
}

/// Join of every input and initial memory tag: the single tag a
/// coarse-grained monitor assigns to everything leaving the component.
pub fn boundary_tag(width: u8, input_tags: &[Tag], initial_memory_tags: &[Tag]) -> Result<Tag> {
    let zero = Tag::untainted(width)?;
    join_all(zero, input_tags.iter().chain(initial_memory_tags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvalue::make_bitvalue;

    fn t(bits: u64) -> Tag {
        Tag::new(4, bits).unwrap()
    }

    fn u4(v: i128) -> BitValue {
        make_bitvalue(BitType::unsigned(4).unwrap(), v)
    }

    fn ty4() -> BitType {
        BitType::unsigned(4).unwrap()
    }

    #[test]
    fn join_examples() {
        assert_eq!(join(t(0b0101), t(0b0011)).unwrap(), t(0b0111));
        assert_eq!(join(t(0), t(0b1001)).unwrap(), t(0b1001));
        assert_eq!(join(t(0b1001), t(0b1001)).unwrap(), t(0b1001));
    }

    #[test]
    fn join_rejects_width_mismatch() {
        let e = join(t(1), Tag::new(3, 1).unwrap());
        assert_eq!(e, Err(Error::WidthMismatch { left: 4, right: 3 }));
    }

    #[test]
    fn tag_bounds() {
        assert!(Tag::new(0, 0).is_err());
        assert!(Tag::new(33, 0).is_err());
        assert!(Tag::new(32, u32::MAX as u64).is_ok());
        assert!(matches!(Tag::new(2, 4), Err(Error::TagOutOfRange { .. })));
    }

    #[test]
    fn union_joins_all_operands() {
        let r = propagate(PropagationRule::FineUnion, OpKind::Mul, &[(u4(3), t(0b01)), (u4(5), t(0b10))], ty4());
        assert_eq!(r.unwrap(), t(0b11));
    }

    #[test]
    fn precise_and_with_untainted_zero_kills() {
        let r = propagate(PropagationRule::FinePrecise, OpKind::And, &[(u4(0), t(0)), (u4(7), t(1))], ty4());
        assert_eq!(r.unwrap(), t(0));
        // A tainted zero does not kill.
        let r = propagate(PropagationRule::FinePrecise, OpKind::And, &[(u4(0), t(2)), (u4(7), t(1))], ty4());
        assert_eq!(r.unwrap(), t(3));
    }

    #[test]
    fn precise_or_kill_depends_on_result_width() {
        let ops = [(u4(15), t(0)), (u4(3), t(1))];
        let r = propagate(PropagationRule::FinePrecise, OpKind::Or, &ops, ty4()).unwrap();
        assert_eq!(r, t(0));
        // 15 does not cover the upper bits of an 8-bit result.
        let u8t = BitType::unsigned(8).unwrap();
        let r = propagate(PropagationRule::FinePrecise, OpKind::Or, &ops, u8t).unwrap();
        assert_eq!(r, t(1));
        // -1 covers every width.
        let m1 = make_bitvalue(BitType::signed(4).unwrap(), -1);
        let r = propagate(PropagationRule::FinePrecise, OpKind::Or, &[(m1, t(0)), (u4(3), t(1))], u8t).unwrap();
        assert_eq!(r, t(0));
    }

    #[test]
    fn precise_mux_tracks_selected_branch() {
        let sel = make_bitvalue(BitType::BOOL, 1);
        let ops = [(sel, t(1)), (u4(7), t(0)), (u4(2), t(2))];
        assert_eq!(propagate(PropagationRule::FinePrecise, OpKind::Mux, &ops, ty4()).unwrap(), t(1));
        assert_eq!(propagate(PropagationRule::FineUnion, OpKind::Mux, &ops, ty4()).unwrap(), t(3));
    }

    #[test]
    fn arity_and_memory_ops_rejected() {
        let r = propagate(PropagationRule::FineUnion, OpKind::Add, &[(u4(1), t(0))], ty4());
        assert!(matches!(r, Err(Error::ArityMismatch { expected: 2, got: 1, .. })));
        let r = propagate(PropagationRule::FineUnion, OpKind::Load, &[(u4(1), t(0)), (u4(1), t(0))], ty4());
        assert_eq!(r, Err(Error::UnsupportedOp(OpKind::Load)));
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(boundary_tag(4, &[t(0), t(0)], &[]).unwrap(), t(0));
        assert_eq!(boundary_tag(4, &[t(1), t(2)], &[t(0)]).unwrap(), t(3));
        assert_eq!(boundary_tag(4, &[t(9)], &[]).unwrap(), t(9));
        assert!(boundary_tag(4, &[Tag::new(2, 1).unwrap()], &[]).is_err());
    }

    #[test]
    fn precise_store_drops_address_tag() {
        let r = PropagationRule::FinePrecise.store_tag(t(1), t(2)).unwrap();
        assert_eq!(r, t(1));
        let r = PropagationRule::FineUnion.store_tag(t(1), t(2)).unwrap();
        assert_eq!(r, t(3));
    }
}
