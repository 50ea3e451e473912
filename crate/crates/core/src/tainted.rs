// SPDX-License-Identifier: Apache-2.0

//! Values paired with taint tags. Every operator computes the result value
//! exactly as the untagged datatype would and the result tag alongside it.

use std::fmt;

use crate::bitvalue::{eval_binop, eval_unop, BitType, BitValue, OpKind};
use crate::error::{Error, Result};
use crate::taint::{check_tag_width, join, propagate, DiftMode, PropagationRule, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiftValue {
    pub value: BitValue,
    pub tag: Tag,
}

impl DiftValue {
    pub fn is_tainted(&self) -> bool {
        self.tag.is_tainted()
    }
}

impl fmt::Display for DiftValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.value, self.tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OnException {
    /// Queue the exception and keep executing.
    #[default]
    Record,
    /// Stop at the first denying checkpoint.
    Halt,
}

impl OnException {
    pub fn name(self) -> &'static str {
        match self {
            OnException::Record => "record",
            OnException::Halt => "halt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiftConfig {
    pub tag_width: u8,
    pub mode: DiftMode,
    pub on_exception: OnException,
}

impl DiftConfig {
    pub fn new(tag_width: u8, mode: DiftMode) -> Result<Self> {
        check_tag_width(tag_width)?;
        Ok(DiftConfig {
            tag_width,
            mode,
            on_exception: OnException::Record,
        })
    }

    pub fn with_on_exception(mut self, on_exception: OnException) -> Self {
        self.on_exception = on_exception;
        self
    }

    /// Rule used for per-operation propagation. Coarse mode still computes
    /// values through the tagged datatype, so it falls back to union.
    pub fn rule(&self) -> PropagationRule {
        self.mode.rule().unwrap_or(PropagationRule::FineUnion)
    }
}

/// Attaches a default tag to a value, checking it against the expected tag
/// width.
pub fn lift(v: BitValue, t: Tag, tag_width: u8) -> Result<DiftValue> {
    if t.width() != tag_width {
        return Err(Error::WidthMismatch {
            left: t.width(),
            right: tag_width,
        });
    }
    Ok(DiftValue { value: v, tag: t })
}

pub fn apply_binop(
    kind: OpKind,
    a: DiftValue,
    b: DiftValue,
    result_ty: BitType,
    rule: PropagationRule,
) -> Result<DiftValue> {
    let value = eval_binop(kind, a.value, b.value, result_ty)?;
    let tag = propagate(rule, kind, &[(a.value, a.tag), (b.value, b.tag)], result_ty)?;
    Ok(DiftValue { value, tag })
}

/// Unary operators never kill taint.
pub fn apply_unop(kind: OpKind, a: DiftValue, result_ty: BitType, _rule: PropagationRule) -> Result<DiftValue> {
    let value = eval_unop(kind, a.value, result_ty)?;
    Ok(DiftValue { value, tag: a.tag })
}

pub fn apply_mux(
    sel: DiftValue,
    t_branch: DiftValue,
    f_branch: DiftValue,
    result_ty: BitType,
    rule: PropagationRule,
) -> Result<DiftValue> {
    join(join(sel.tag, t_branch.tag)?, f_branch.tag)?;
    let chosen = if sel.value.is_zero() { f_branch } else { t_branch };
    let tag = propagate(
        rule,
        OpKind::Mux,
        &[(sel.value, sel.tag), (t_branch.value, t_branch.tag), (f_branch.value, f_branch.tag)],
        result_ty,
    )?;
    Ok(DiftValue {
        value: chosen.value.cast(result_ty),
        tag,
    })
}
