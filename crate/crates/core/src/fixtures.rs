// SPDX-License-Identifier: Apache-2.0

//! The demo kernels shipped with the toolkit.

/// 4-tap FIR filter with a secret-label checkpoint on its output.
pub const FIR4: &str = include_str!("../fixtures/fir4.json");
/// 8-element dot product over two memories, scaled, biased, and rectified.
pub const DOT8: &str = include_str!("../fixtures/dot8.json");
/// Store through an index derived from an untrusted input, guarded by a
/// checkpoint that rejects any tainted index.
pub const OVERFLOW_DEMO: &str = include_str!("../fixtures/overflow_demo.json");

pub const ALL: [(&str, &str); 3] = [("fir4", FIR4), ("dot8", DOT8), ("overflow_demo", OVERFLOW_DEMO)];
