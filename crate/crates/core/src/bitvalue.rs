// SPDX-License-Identifier: Apache-2.0

//! Bit-accurate integers of declared width and signedness.
//!
//! Every value is stored in canonical form: an unsigned bit pattern in
//! `[0, 2^width)`. Signed values are two's complement patterns. All
//! arithmetic is performed on the exact integer interpretation of the
//! operands and the result is wrapped into an explicitly declared result
//! type; there is no implicit promotion.
//!
//! Exact intermediate results use `i128`. Operands never exceed 64 bits,
//! so sums, differences, quotients, and comparisons are exact. Products and
//! left shifts may exceed `i128`, but they are only ever observed modulo
//! `2^width` with `width <= 64`, and two's complement wrapping in `i128`
//! preserves every residue modulo `2^128`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_WIDTH: u8 = 1;
pub const MAX_WIDTH: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitType {
    width: u8,
    signed: bool,
}

impl BitType {
    pub fn new(width: u32, signed: bool) -> Result<Self> {
        if !(MIN_WIDTH as u32..=MAX_WIDTH as u32).contains(&width) {
            return Err(Error::InvalidType {
                width,
                min: MIN_WIDTH as u32,
                max: MAX_WIDTH as u32,
            });
        }
        Ok(BitType {
            width: width as u8,
            signed,
        })
    }

    pub fn unsigned(width: u32) -> Result<Self> {
        Self::new(width, false)
    }

    pub fn signed(width: u32) -> Result<Self> {
        Self::new(width, true)
    }

    /// The 1-bit unsigned type produced by comparisons.
    pub const BOOL: BitType = BitType {
        width: 1,
        signed: false,
    };

    pub fn width(self) -> u8 {
        self.width
    }

    pub fn is_signed(self) -> bool {
        self.signed
    }

    /// All-ones pattern of this width.
    pub fn mask(self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    /// Smallest integer representable in this type.
    pub fn min_int(self) -> i128 {
        if self.signed {
            -(1i128 << (self.width - 1))
        } else {
            0
        }
    }

    /// Largest integer representable in this type.
    pub fn max_int(self) -> i128 {
        if self.signed {
            (1i128 << (self.width - 1)) - 1
        } else {
            self.mask() as i128
        }
    }
}

impl fmt::Display for BitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.signed { 's' } else { 'u' };
        write!(f, "{}{}", s, self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitValue {
    ty: BitType,
    bits: u64,
}

impl BitValue {
    /// Wraps `raw` into `ty`: `bits = raw mod 2^width`.
    pub fn new(ty: BitType, raw: i128) -> Self {
        BitValue {
            ty,
            bits: (raw as u64) & ty.mask(),
        }
    }

    /// Builds a value from a bit pattern, truncating bits above the width.
    pub fn from_bits(ty: BitType, bits: u64) -> Self {
        BitValue {
            ty,
            bits: bits & ty.mask(),
        }
    }

    pub fn zero(ty: BitType) -> Self {
        BitValue { ty, bits: 0 }
    }

    pub fn ty(&self) -> BitType {
        self.ty
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// The integer this pattern denotes under the value's signedness.
    pub fn to_int(&self) -> i128 {
        let w = self.ty.width;
        if self.ty.signed && (self.bits >> (w - 1)) & 1 == 1 {
            self.bits as i128 - (1i128 << w)
        } else {
            self.bits as i128
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits == self.ty.mask()
    }

    /// Reinterprets the exact integer value in another type.
    pub fn cast(&self, ty: BitType) -> BitValue {
        BitValue::new(ty, self.to_int())
    }
}

impl fmt::Display for BitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.to_int(), self.ty)
    }
}

/// Free-function form of [`BitValue::new`].
pub fn make_bitvalue(ty: BitType, raw: i128) -> BitValue {
    BitValue::new(ty, raw)
}

pub fn to_int(v: &BitValue) -> i128 {
    v.to_int()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    Neg,
    Mux,
    Load,
    Store,
}

impl OpKind {
    pub const ALL: [OpKind; 21] = [
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mul,
        OpKind::Div,
        OpKind::Mod,
        OpKind::And,
        OpKind::Or,
        OpKind::Xor,
        OpKind::Shl,
        OpKind::Shr,
        OpKind::Eq,
        OpKind::Ne,
        OpKind::Lt,
        OpKind::Le,
        OpKind::Gt,
        OpKind::Ge,
        OpKind::Not,
        OpKind::Neg,
        OpKind::Mux,
        OpKind::Load,
        OpKind::Store,
    ];

    /// Binary operators that produce a value from two value operands.
    pub const BINARY: [OpKind; 16] = [
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mul,
        OpKind::Div,
        OpKind::Mod,
        OpKind::And,
        OpKind::Or,
        OpKind::Xor,
        OpKind::Shl,
        OpKind::Shr,
        OpKind::Eq,
        OpKind::Ne,
        OpKind::Lt,
        OpKind::Le,
        OpKind::Gt,
        OpKind::Ge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Div => "div",
            OpKind::Mod => "mod",
            OpKind::And => "and",
            OpKind::Or => "or",
            OpKind::Xor => "xor",
            OpKind::Shl => "shl",
            OpKind::Shr => "shr",
            OpKind::Eq => "eq",
            OpKind::Ne => "ne",
            OpKind::Lt => "lt",
            OpKind::Le => "le",
            OpKind::Gt => "gt",
            OpKind::Ge => "ge",
            OpKind::Not => "not",
            OpKind::Neg => "neg",
            OpKind::Mux => "mux",
            OpKind::Load => "load",
            OpKind::Store => "store",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            OpKind::Not | OpKind::Neg => 1,
            OpKind::Mux | OpKind::Store => 3,
            _ => 2,
        }
    }

    pub fn is_binary(self) -> bool {
        Self::BINARY.contains(&self)
    }

    pub fn is_unary(self) -> bool {
        matches!(self, OpKind::Not | OpKind::Neg)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            OpKind::Eq | OpKind::Ne | OpKind::Lt | OpKind::Le | OpKind::Gt | OpKind::Ge
        )
    }

    pub fn is_memory(self) -> bool {
        matches!(self, OpKind::Load | OpKind::Store)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        OpKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown op `{s}`"))
    }
}

/// Evaluates a binary value operator and wraps the exact result into
/// `result_ty`.
pub fn eval_binop(kind: OpKind, a: BitValue, b: BitValue, result_ty: BitType) -> Result<BitValue> {
    if kind.is_comparison() {
        if result_ty != BitType::BOOL {
            return Err(Error::TypeMismatch(format!(
                "comparison `{kind}` must produce u1, not {result_ty}"
            )));
        }
        let (x, y) = (a.to_int(), b.to_int());
        let r = match kind {
            OpKind::Eq => x == y,
            OpKind::Ne => x != y,
            OpKind::Lt => x < y,
            OpKind::Le => x <= y,
            OpKind::Gt => x > y,
            OpKind::Ge => x >= y,
            _ => unreachable!(),
        };
        return Ok(BitValue::new(result_ty, r as i128));
    }

    let (x, y) = (a.to_int(), b.to_int());
    let raw = match kind {
        OpKind::Add => x.wrapping_add(y),
        OpKind::Sub => x.wrapping_sub(y),
        OpKind::Mul => x.wrapping_mul(y),
        OpKind::Div | OpKind::Mod if y == 0 => return Err(Error::DivisionByZero),
        // i128 division truncates toward zero and the remainder follows
        // the dividend.
        OpKind::Div => x / y,
        OpKind::Mod => x % y,
        OpKind::And => x & y,
        OpKind::Or => x | y,
        OpKind::Xor => x ^ y,
        OpKind::Shl => x.wrapping_shl(shift_amount(b, result_ty)),
        // `to_int` is non-negative for unsigned operands, so an arithmetic
        // shift of the exact integer is a logical shift for them.
        OpKind::Shr => x >> shift_amount(b, result_ty),
        _ => return Err(Error::UnsupportedOp(kind)),
    };
    Ok(BitValue::new(result_ty, raw))
}

fn shift_amount(b: BitValue, result_ty: BitType) -> u32 {
    (b.bits() % result_ty.width() as u64) as u32
}

pub fn eval_unop(kind: OpKind, a: BitValue, result_ty: BitType) -> Result<BitValue> {
    match kind {
        // Complementing the pattern within a's width and reinterpreting is
        // the same as complementing the exact integer.
        OpKind::Not => {
            let flipped = BitValue::from_bits(a.ty(), !a.bits());
            Ok(flipped.cast(result_ty))
        }
        OpKind::Neg => Ok(BitValue::new(result_ty, a.to_int().wrapping_neg())),
        _ => Err(Error::UnsupportedOp(kind)),
    }
}
