// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use crate::bitvalue::{eval_binop, eval_unop, BitType, BitValue, OpKind};
use crate::error::{Error, Result};

/// Largest operand width the oracle will enumerate.
pub const ORACLE_WIDTH_CAP: u8 = 6;

fn evaluate(kind: OpKind, args: &[BitValue], result_ty: BitType) -> Result<BitValue> {
    match kind {
        OpKind::Mux => Ok(if args[0].is_zero() { args[2] } else { args[1] }.cast(result_ty)),
        k if k.is_unary() => eval_unop(k, args[0], result_ty),
        k => eval_binop(k, args[0], args[1], result_ty),
    }
}

/// Decides by exhaustive enumeration whether `kind`'s result is independent
/// of the operands at `tainted_positions` once the remaining operands are
/// fixed to `untainted_values`.
///
/// Evaluation errors count as outcomes: a division whose tainted divisor can
/// be zero is not constant.
pub fn independence_oracle(
    kind: OpKind,
    operand_types: &[BitType],
    tainted_positions: &BTreeSet<usize>,
    untainted_values: &BTreeMap<usize, i128>,
    result_ty: BitType,
) -> Result<bool> {
    if kind.is_memory() {
        return Err(Error::UnsupportedOp(kind));
    }
    if operand_types.len() != kind.arity() {
        return Err(Error::ArityMismatch {
            op: kind,
            expected: kind.arity(),
            got: operand_types.len(),
        });
    }
    if let Some(ty) = operand_types.iter().find(|t| t.width() > ORACLE_WIDTH_CAP) {
        return Err(Error::WidthTooLarge {
            width: ty.width(),
            cap: ORACLE_WIDTH_CAP,
        });
    }

    let mut args: Vec<BitValue> = operand_types
        .iter()
        .enumerate()
        .map(|(i, &ty)| BitValue::new(ty, untainted_values.get(&i).copied().unwrap_or(0)))
        .collect();
    let positions: Vec<usize> = tainted_positions
        .iter()
        .copied()
        .filter(|&p| p < operand_types.len())
        .collect();
    for &p in &positions {
        args[p] = BitValue::zero(operand_types[p]);
    }

    let first = evaluate(kind, &args, result_ty);
    // Odometer over the tainted positions' bit patterns.
    loop {
        let mut carry = true;
        for &p in &positions {
            let ty = operand_types[p];
            let next = args[p].bits().wrapping_add(1) & ty.mask();
            args[p] = BitValue::from_bits(ty, next);
            if next != 0 {
                carry = false;
                break;
            }
        }
        if carry {
            return Ok(true);
        }
        if evaluate(kind, &args, result_ty) != first {
            return Ok(false);
        }
    }
}
