// SPDX-License-Identifier: Apache-2.0

mod common;

use dift_core::bitvalue::{eval_binop, eval_unop, make_bitvalue};
use dift_core::{BitType, BitValue, OpKind};
use proptest::prelude::*;

use common::{exhaustive_binop_check, interpret, wrap};

#[test]
fn binops_match_unbounded_reference_up_to_width_6() {
    let (evals, bad) = exhaustive_binop_check(6);
    assert!(evals > 1_000_000);
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn round_trip_exhaustive_up_to_width_8() {
    for ty in common::all_types(8) {
        for bits in 0..=ty.mask() {
            let v = BitValue::from_bits(ty, bits);
            assert_eq!(make_bitvalue(ty, v.to_int()), v);
            assert_eq!(v.to_int(), i128::try_from(interpret(bits, ty)).unwrap());
        }
    }
}

#[test]
fn frozen_shr_example() {
    // floor(-6 / 2) = -3, which is 0b1101 in four bits.
    let s4 = BitType::signed(4).unwrap();
    let r = eval_binop(OpKind::Shr, make_bitvalue(s4, -6), make_bitvalue(BitType::unsigned(4).unwrap(), 1), s4);
    assert_eq!(r.unwrap().bits(), 13);
}

fn any_type() -> impl Strategy<Value = BitType> {
    (1u32..=64, any::<bool>()).prop_map(|(w, s)| BitType::new(w, s).unwrap())
}

fn any_value() -> impl Strategy<Value = BitValue> {
    (any_type(), any::<u64>()).prop_map(|(ty, bits)| BitValue::from_bits(ty, bits))
}

fn binary_op() -> impl Strategy<Value = OpKind> {
    proptest::sample::select(OpKind::BINARY.to_vec())
}

proptest! {
    #[test]
    fn outputs_are_canonical(kind in binary_op(), a in any_value(), b in any_value(), r in any_type()) {
        let r = if kind.is_comparison() { BitType::BOOL } else { r };
        if let Ok(v) = eval_binop(kind, a, b, r) {
            prop_assert!(v.bits() <= r.mask());
            prop_assert_eq!(v.ty(), r);
            if kind.is_comparison() {
                prop_assert!(v.bits() <= 1);
            }
        }
    }

    #[test]
    fn wide_binops_match_reference(kind in binary_op(), a in any_value(), b in any_value(), r in any_type()) {
        let r = if kind.is_comparison() { BitType::BOOL } else { r };
        let got = eval_binop(kind, a, b, r).ok().map(|v| v.bits());
        let want = common::reference_binop(kind, a.bits(), a.ty(), b.bits(), b.ty(), r);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn unops_match_reference(a in any_value(), r in any_type()) {
        let x = interpret(a.bits(), a.ty());
        prop_assert_eq!(eval_unop(OpKind::Neg, a, r).unwrap().bits(), wrap(&-&x, r));
        // Complement within a's width, read back under a's signedness.
        let flipped = if a.ty().is_signed() { -x - 1 } else { common::pow2(a.ty().width() as u32) - 1 - x };
        prop_assert_eq!(eval_unop(OpKind::Not, a, r).unwrap().bits(), wrap(&flipped, r));
    }

    #[test]
    fn make_is_mathematical_modulus(ty in any_type(), raw in any::<i64>()) {
        let v = make_bitvalue(ty, raw as i128);
        prop_assert_eq!(v.bits(), wrap(&raw.into(), ty));
    }
}
