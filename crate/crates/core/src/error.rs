// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::bitvalue::OpKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid type: width {width} is outside {min}..={max}")]
    InvalidType { width: u32, min: u32, max: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("tag width mismatch: {left} vs {right}")]
    WidthMismatch { left: u8, right: u8 },
    #[error("tag bits {bits:#x} do not fit in {width} bits")]
    TagOutOfRange { bits: u64, width: u8 },
    #[error("`{op}` expects {expected} operand(s), got {got}")]
    ArityMismatch {
        op: OpKind,
        expected: usize,
        got: usize,
    },
    #[error("`{0}` is not supported here")]
    UnsupportedOp(OpKind),
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("duplicate policy `{0}`")]
    DuplicatePolicy(String),
    #[error("bad register address {0}")]
    BadAddress(u32),
    #[error("operand width {width} exceeds the enumeration cap of {cap}")]
    WidthTooLarge { width: u8, cap: u8 },
    #[error("out-of-bounds access to `{memory}` at address {address} (size {size})")]
    OutOfBoundsAddress {
        memory: String,
        address: i128,
        size: usize,
    },
    #[error("node `{node}` at step {step}: {source}")]
    AtNode {
        node: String,
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("bad run inputs: {0}")]
    BadInputs(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

impl Error {
    /// Strips any `AtNode` wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for runtime evaluation failures (division by zero, out-of-bounds).
    pub fn is_evaluation(&self) -> bool {
        matches!(
            self.root(),
            Error::DivisionByZero | Error::OutOfBoundsAddress { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
