// SPDX-License-Identifier: Apache-2.0

//! The on-disk report format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SimulationReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRecord {
    pub value: u64,
    pub tag: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExceptionRecord {
    pub checkpoint: String,
    pub node: String,
    pub tag: u32,
    pub step: usize,
    pub policy: String,
}

/// Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub outputs: BTreeMap<String, OutputRecord>,
    pub exceptions: Vec<ExceptionRecord>,
    pub irq: bool,
    pub steps: usize,
    pub mode: String,
    pub rule: String,
}

impl From<&SimulationReport> for ReportFile {
    fn from(r: &SimulationReport) -> Self {
        ReportFile {
            outputs: r
                .outputs
                .iter()
                .map(|(id, o)| {
                    (
                        id.clone(),
                        OutputRecord {
                            value: o.value,
                            tag: o.tag,
                        },
                    )
                })
                .collect(),
            exceptions: r
                .exceptions
                .iter()
                .map(|e| ExceptionRecord {
                    checkpoint: e.checkpoint_id.clone(),
                    node: e.node_id.clone(),
                    tag: e.tag_bits,
                    step: e.step,
                    policy: e.policy_name.clone(),
                })
                .collect(),
            irq: r.irq,
            steps: r.steps_executed,
            mode: r.mode.name().to_string(),
            rule: r.mode.rule().map_or("none", |r| r.name()).to_string(),
        }
    }
}

impl SimulationReport {
    pub fn to_file(&self) -> ReportFile {
        ReportFile::from(self)
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadInputs(e.to_string()))
    }
}
