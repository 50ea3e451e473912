// SPDX-License-Identifier: Apache-2.0

//! Reference semantics computed on unbounded integers, independent of the
//! library's `i128` evaluation path.

#![allow(dead_code)]

use dift_core::{BitType, OpKind};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn pow2(n: u32) -> BigInt {
    BigInt::one() << n as usize
}

/// Integer denoted by `bits` under `ty`.
pub fn interpret(bits: u64, ty: BitType) -> BigInt {
    let w = ty.width() as u32;
    let x = BigInt::from(bits);
    if ty.is_signed() && (bits >> (w - 1)) & 1 == 1 {
        x - pow2(w)
    } else {
        x
    }
}

/// `x mod 2^width` as a canonical pattern.
pub fn wrap(x: &BigInt, ty: BitType) -> u64 {
    x.mod_floor(&pow2(ty.width() as u32)).to_u64().unwrap()
}

fn trunc_div(x: &BigInt, y: &BigInt) -> BigInt {
    let q = x.abs().div_floor(&y.abs());
    if x.is_negative() != y.is_negative() {
        -q
    } else {
        q
    }
}

/// Two's complement bitwise op, evaluated on 72-bit patterns. Operands are at
/// most 65 bits of magnitude, so the low `result` bits are exact.
fn bitwise(x: &BigInt, y: &BigInt, f: impl Fn(u128, u128) -> u128) -> BigInt {
    let m = pow2(72);
    let xp = x.mod_floor(&m).to_u128().unwrap();
    let yp = y.mod_floor(&m).to_u128().unwrap();
    BigInt::from(f(xp, yp) & ((1u128 << 72) - 1))
}

/// Reference `eval_binop`. `None` on division by zero.
pub fn reference_binop(kind: OpKind, a: u64, a_ty: BitType, b: u64, b_ty: BitType, r_ty: BitType) -> Option<u64> {
    let (x, y) = (interpret(a, a_ty), interpret(b, b_ty));
    let shift = || (b % r_ty.width() as u64) as u32;
    let exact = match kind {
        OpKind::Add => &x + &y,
        OpKind::Sub => &x - &y,
        OpKind::Mul => &x * &y,
        OpKind::Div | OpKind::Mod if y.is_zero() => return None,
        OpKind::Div => trunc_div(&x, &y),
        OpKind::Mod => &x - &y * trunc_div(&x, &y),
        OpKind::And => bitwise(&x, &y, |p, q| p & q),
        OpKind::Or => bitwise(&x, &y, |p, q| p | q),
        OpKind::Xor => bitwise(&x, &y, |p, q| p ^ q),
        OpKind::Shl => &x * pow2(shift()),
        OpKind::Shr => x.div_floor(&pow2(shift())),
        OpKind::Eq => BigInt::from((x == y) as u8),
        OpKind::Ne => BigInt::from((x != y) as u8),
        OpKind::Lt => BigInt::from((x < y) as u8),
        OpKind::Le => BigInt::from((x <= y) as u8),
        OpKind::Gt => BigInt::from((x > y) as u8),
        OpKind::Ge => BigInt::from((x >= y) as u8),
        k => panic!("not a binary op: {k}"),
    };
    Some(wrap(&exact, r_ty))
}

/// Result types exercised for a binary op with left operand type `a_ty`.
pub fn result_types(kind: OpKind, a_ty: BitType) -> Vec<BitType> {
    if kind.is_comparison() {
        vec![BitType::BOOL]
    } else {
        vec![a_ty, BitType::new(6, !a_ty.is_signed()).unwrap()]
    }
}

pub fn all_types(max_width: u32) -> Vec<BitType> {
    (1..=max_width)
        .flat_map(|w| [BitType::new(w, false).unwrap(), BitType::new(w, true).unwrap()])
        .collect()
}

/// Exhaustive comparison of `eval_binop` against the reference for every
/// binary op and operand type of width <= `max_width`. Returns
/// (evaluations, mismatches).
pub fn exhaustive_binop_check(max_width: u32) -> (usize, Vec<String>) {
    let mut evals = 0;
    let mut bad = Vec::new();
    let types = all_types(max_width);
    for kind in OpKind::BINARY {
        for &a_ty in &types {
            for &b_ty in &types {
                for r_ty in result_types(kind, a_ty) {
                    for a in 0..=a_ty.mask() {
                        for b in 0..=b_ty.mask() {
                            evals += 1;
                            let got = dift_core::bitvalue::eval_binop(
                                kind,
                                dift_core::BitValue::from_bits(a_ty, a),
                                dift_core::BitValue::from_bits(b_ty, b),
                                r_ty,
                            )
                            .ok()
                            .map(|v| v.bits());
                            let want = reference_binop(kind, a, a_ty, b, b_ty, r_ty);
                            if got != want && bad.len() < 10 {
                                bad.push(format!("{kind} {a}:{a_ty} {b}:{b_ty} -> {r_ty}: got {got:?}, want {want:?}"));
                            }
                        }
                    }
                }
            }
        }
    }
    (evals, bad)
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Sweeps every binary op over 4-bit operand types with one tainted position
/// and every value of the untainted operand. Each FinePrecise kill must be
/// confirmed by the independence oracle. Returns (kills, violations).
pub fn precise_soundness_check() -> (usize, Vec<String>) {
    use dift_core::simulator::independence_oracle;
    use dift_core::taint::propagate;
    use dift_core::{BitValue, PropagationRule, Tag};
    use std::collections::{BTreeMap, BTreeSet};

    let types = [BitType::unsigned(4).unwrap(), BitType::signed(4).unwrap()];
    let (one, zero) = (Tag::new(1, 1).unwrap(), Tag::new(1, 0).unwrap());
    let mut kills = 0;
    let mut bad = Vec::new();
    for kind in OpKind::BINARY {
        for a_ty in types {
            for b_ty in types {
                for r_ty in result_types(kind, a_ty) {
                    for tainted in 0..2 {
                        let other = 1 - tainted;
                        let tys = [a_ty, b_ty];
                        for fixed in 0..16u64 {
                            let fixed_v = BitValue::from_bits(tys[other], fixed);
                            // The tainted operand's value does not enter the kill decision,
                            // so every value is tried.
                            for free in 0..16u64 {
                                let free_v = BitValue::from_bits(tys[tainted], free);
                                let mut ops = [(free_v, one), (free_v, one)];
                                ops[other] = (fixed_v, zero);
                                let t = propagate(PropagationRule::FinePrecise, kind, &ops, r_ty).unwrap();
                                if t.is_tainted() {
                                    continue;
                                }
                                kills += 1;
                                let constant = independence_oracle(
                                    kind,
                                    &tys,
                                    &BTreeSet::from([tainted]),
                                    &BTreeMap::from([(other, fixed_v.to_int())]),
                                    r_ty,
                                )
                                .unwrap();
                                if !constant {
                                    bad.push(format!("{kind} {a_ty},{b_ty}->{r_ty}: operand {other} = {fixed}"));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    (kills, bad)
}
