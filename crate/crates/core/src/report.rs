//! The machine-readable run report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ProbeConfig;
use crate::verdict::{Status, Verdict, Witness};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One named verdict; `expected` is set when the verdict is compared with
/// a recorded expectation (gallery claims).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Status>,
}

impl VerdictRecord {
    /// Whether this record counts as a success for the exit status.
    pub fn met(&self) -> bool {
        match self.expected {
            Some(s) => s == self.verdict.status,
            None => self.verdict.is_pass(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub config: ProbeConfig,
    pub verdicts: Vec<VerdictRecord>,
    pub witnesses: Vec<Witness>,
    /// Command-specific measurements.
    #[serde(default)]
    pub results: serde_json::Value,
    /// Wall-clock seconds per phase; emptied by [`Report::normalized`].
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: impl Into<String>, config: &ProbeConfig) -> Self {
        Report {
            tool_version: TOOL_VERSION.to_string(),
            command: command.into(),
            config: config.clone(),
            verdicts: Vec::new(),
            witnesses: Vec::new(),
            results: serde_json::Value::Null,
            timings: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, verdict: Verdict) {
        self.push_expected(name, verdict, None);
    }

    pub fn push_expected(
        &mut self,
        name: impl Into<String>,
        verdict: Verdict,
        expected: Option<Status>,
    ) {
        if let Some(w) = &verdict.witness {
            self.witnesses.push(w.clone());
        }
        self.verdicts.push(VerdictRecord {
            name: name.into(),
            verdict,
            expected,
        });
    }

    pub fn set_results<T: Serialize>(&mut self, value: &T) -> Result<()> {
        self.results = serde_json::to_value(value).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(())
    }

    pub fn time(&mut self, phase: impl Into<String>, seconds: f64) {
        self.timings.insert(phase.into(), seconds);
    }

    /// The report without timings, for byte-level comparison of runs.
    pub fn normalized(&self) -> Report {
        Report {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }

    /// 0 when every record is met, 1 if an unmet record is a FAIL (or an
    /// expectation mismatch), 2 if the unmet ones are all INCONCLUSIVE.
    pub fn exit_code(&self) -> i32 {
        let unmet: Vec<&VerdictRecord> = self.verdicts.iter().filter(|r| !r.met()).collect();
        if unmet.is_empty() {
            0
        } else if unmet
            .iter()
            .all(|r| r.expected.is_none() && r.verdict.is_inconclusive())
        {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
