// SPDX-License-Identifier: Apache-2.0

//! Dynamic information flow tracking for dataflow accelerator kernels.
//!
//! * [`bitvalue`]: bit-accurate integers with wrap-around arithmetic.
//! * [`taint`]: label-set tags and propagation rules.
//! * [`tainted`]: values paired with tags; every operator returns both.
//! * [`monitor`]: policies, checkpoints, security exceptions, and the
//!   monitor's register file.
//! * [`kernel`]: the kernel IR, its validator, optimization passes, DIFT
//!   instrumentation, and DOT export.
//! * [`fixtures`]: the shipped demo kernels.
//! * [`simulator`]: baseline and DIFT execution, consistency checking, the
//!   independence oracle, and property fuzzing.

pub mod bitvalue;
pub mod error;
pub mod fixtures;
pub mod kernel;
pub mod monitor;
pub mod simulator;
pub mod taint;
pub mod tainted;

pub use bitvalue::{BitType, BitValue, OpKind};
pub use error::{Error, Result};
pub use kernel::{parse_kernel, Kernel};
pub use monitor::{MonitorState, Policy, SecurityException};
pub use taint::{DiftMode, PropagationRule, Tag};
pub use tainted::{DiftConfig, DiftValue, OnException};
