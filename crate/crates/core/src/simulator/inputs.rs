// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitvalue::BitType;
use crate::error::{Error, Result};
use crate::kernel::{Diagnostic, Kernel, Location, MemoryDecl};

/// Input assignment for one run. Values are wrapped into the declared
/// input type; tags override the declared default tags. Memory overrides
/// replace the leading cells of a memory's initial contents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInputs {
    #[serde(default)]
    pub values: BTreeMap<String, i128>,
    #[serde(default)]
    pub tags: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub memory: BTreeMap<String, Vec<i128>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub memory_tags: BTreeMap<String, Vec<u32>>,
}

impl RunInputs {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadInputs(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("inputs serialize")
    }

    /// Rejects assignments to unknown ids and out-of-range tags or memory
    /// lengths.
    pub fn check(&self, k: &Kernel) -> Result<()> {
        let bad = |msg: String| Err(Error::BadInputs(msg));
        let tag_ok = |t: u32| k.tag_width >= 32 || t >> k.tag_width == 0;
        for id in self.values.keys().chain(self.tags.keys()) {
            if !k.inputs.iter().any(|d| &d.id == id) {
                return bad(format!("`{id}` is not an input"));
            }
        }
        for (id, &t) in &self.tags {
            if !tag_ok(t) {
                return bad(format!("tag {t:#b} of `{id}` exceeds tag width {}", k.tag_width));
            }
        }
        for (id, len, tags) in self
            .memory
            .iter()
            .map(|(id, v)| (id, v.len(), None))
            .chain(self.memory_tags.iter().map(|(id, v)| (id, v.len(), Some(v))))
        {
            let Some(m) = k.memories.iter().find(|m| &m.id == id) else {
                return bad(format!("`{id}` is not a memory"));
            };
            if len > m.size {
                return bad(format!("`{id}` has {} cells, got {len}", m.size));
            }
            if tags.is_some_and(|ts| !ts.iter().all(|&t| tag_ok(t))) {
                return bad(format!("memory tag of `{id}` exceeds tag width {}", k.tag_width));
            }
        }
        Ok(())
    }

    /// One warning per kernel input without an assigned value (it reads as 0).
    pub fn missing(&self, k: &Kernel) -> Vec<Diagnostic> {
        k.inputs
            .iter()
            .filter(|d| !self.values.contains_key(&d.id))
            .map(|d| Diagnostic::warning(Location::Id(d.id.clone()), "no value given, using 0"))
            .collect()
    }

    pub fn memory_value(&self, m: &MemoryDecl, cell: usize) -> i128 {
        self.memory
            .get(&m.id)
            .and_then(|v| v.get(cell))
            .or_else(|| m.init.as_ref().and_then(|v| v.get(cell)))
            .copied()
            .unwrap_or(0)
    }

    pub fn memory_tag(&self, m: &MemoryDecl, cell: usize) -> u32 {
        self.memory_tags
            .get(&m.id)
            .and_then(|v| v.get(cell))
            .or_else(|| m.init_tags.as_ref().and_then(|v| v.get(cell)))
            .copied()
            .unwrap_or(0)
    }

    /// Same values with every input and memory tag cleared.
    pub fn untainted(&self, k: &Kernel) -> RunInputs {
        let mut r = self.clone();
        r.tags = k.inputs.iter().map(|d| (d.id.clone(), 0)).collect();
        r.memory_tags = k.memories.iter().map(|m| (m.id.clone(), vec![0; m.size])).collect();
        r
    }
}

/// How [`random_inputs`] assigns tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagChoice {
    /// Each tag is zero half of the time and uniformly random otherwise.
    Random,
    /// Every tag is zero.
    Untainted,
}

fn random_value(ty: BitType, rng: &mut impl Rng) -> i128 {
    let (lo, hi) = (ty.min_int(), ty.max_int());
    match rng.gen_range(0..8) {
        // Small non-negative values keep addresses in bounds often enough.
        0 | 1 => rng.gen_range(0..=hi.min(15)),
        2 => [lo, hi, 0, if ty.is_signed() { -1 } else { 1 }][rng.gen_range(0..4)],
        _ => rng.gen_range(lo..=hi),
    }
}

pub(crate) fn random_tag(width: u8, rng: &mut impl Rng) -> u32 {
    if rng.gen_bool(0.5) {
        0
    } else {
        let mask = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        rng.gen::<u32>() & mask
    }
}

/// Draws a complete input assignment for `k`: every input value, every
/// input tag, and the contents and tags of every memory.
pub fn random_inputs(k: &Kernel, tags: TagChoice, rng: &mut impl Rng) -> Result<RunInputs> {
    let mut r = RunInputs::default();
    let tag = |rng: &mut _| match tags {
        TagChoice::Random => random_tag(k.tag_width, rng),
        TagChoice::Untainted => 0,
    };
    for d in &k.inputs {
        let v = random_value(d.ty()?, rng);
        r.values.insert(d.id.clone(), v);
        let t = tag(rng);
        r.tags.insert(d.id.clone(), t);
    }
    for m in &k.memories {
        let ty = m.cell_ty()?;
        let values = (0..m.size).map(|_| random_value(ty, rng)).collect();
        let ts = (0..m.size).map(|_| tag(rng)).collect();
        r.memory.insert(m.id.clone(), values);
        r.memory_tags.insert(m.id.clone(), ts);
    }
    Ok(r)
}
