//! Tri-state probe outcomes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Structured evidence attached to a FAIL (and optionally to a PASS, e.g.
/// the factorization found by a membership probe).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plaque: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

impl Witness {
    pub fn note(note: impl Into<String>) -> Self {
        Witness {
            note: note.into(),
            ..Default::default()
        }
    }

    pub fn at(mut self, point: &[f64]) -> Self {
        self.point = Some(point.to_vec());
        self
    }

    pub fn along(mut self, direction: &[f64]) -> Self {
        self.direction = Some(direction.to_vec());
        self
    }

    pub fn function(mut self, label: impl Into<String>) -> Self {
        self.function = Some(label.into());
        self
    }

    pub fn plaque(mut self, label: impl Into<String>) -> Self {
        self.plaque = Some(label.into());
        self
    }

    pub fn value(mut self, key: impl Into<String>, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }
}

/// One line of the trace that justifies a verdict: a label and the residual
/// measured at each scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub label: String,
    pub residuals: Vec<f64>,
}

impl Diagnostic {
    pub fn new(label: impl Into<String>, residuals: Vec<f64>) -> Self {
        Diagnostic {
            label: label.into(),
            residuals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<Diagnostic>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            status: Status::Pass,
            witness: None,
            diagnostics: Vec::new(),
        }
    }

    /// A FAIL cannot be built without a witness.
    pub fn fail(witness: Witness) -> Self {
        Verdict {
            status: Status::Fail,
            witness: Some(witness),
            diagnostics: Vec::new(),
        }
    }

    pub fn inconclusive(diagnostics: Vec<Diagnostic>) -> Self {
        Verdict {
            status: Status::Inconclusive,
            witness: None,
            diagnostics,
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_diagnostic(mut self, d: Diagnostic) -> Self {
        self.diagnostics.push(d);
        self
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn is_inconclusive(&self) -> bool {
        self.status == Status::Inconclusive
    }

    /// Conjunction: the first FAIL wins, otherwise any INCONCLUSIVE makes the
    /// whole inconclusive (diagnostics merged), otherwise PASS.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut diags = Vec::new();
        let mut inconclusive = false;
        for v in verdicts {
            match v.status {
                Status::Fail => return v,
                Status::Inconclusive => {
                    inconclusive = true;
                    diags.extend(v.diagnostics);
                }
                Status::Pass => {}
            }
        }
        if inconclusive {
            Verdict::inconclusive(diags)
        } else {
            Verdict::pass()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction() {
        let fail = Verdict::fail(Witness::note("x"));
        let inc = Verdict::inconclusive(vec![Diagnostic::new("r", vec![1.0])]);
        assert!(Verdict::all([Verdict::pass(), inc.clone(), fail.clone()]).is_fail());
        assert!(Verdict::all([Verdict::pass(), inc.clone()]).is_inconclusive());
        assert!(Verdict::all([]).is_pass());
        assert_eq!(Verdict::all([inc.clone(), inc]).diagnostics.len(), 2);
    }

    #[test]
    fn serializes_upper_case() {
        let v = Verdict::fail(Witness::note("n").at(&[0.0]).value("jump", 2.0));
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"FAIL\""), "{s}");
        let back: Verdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
