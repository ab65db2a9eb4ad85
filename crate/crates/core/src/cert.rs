use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        })
    }
}

/// Outcome of one checkable claim, with the evidence that decided it.
///
/// A `Fail` always carries the counterexample in `witness`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Value,
    #[serde(rename = "regionId")]
    pub region_id: String,
}

impl Certification {
    pub fn new(name: impl Into<String>, verdict: Verdict, witness: Value) -> Self {
        Certification {
            name: name.into(),
            verdict,
            witness,
            region_id: String::new(),
        }
    }

    pub fn pass(name: impl Into<String>, witness: Value) -> Self {
        Certification::new(name, Verdict::Pass, witness)
    }

    pub fn fail(name: impl Into<String>, witness: Value) -> Self {
        Certification::new(name, Verdict::Fail, witness)
    }

    pub fn skip(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Certification::new(
            name,
            Verdict::Skip,
            serde_json::json!({ "reason": reason.into() }),
        )
    }

    pub fn with_region(mut self, id: impl Into<String>) -> Self {
        self.region_id = id.into();
        self
    }

    /// Attaches extra evidence under `details`.
    pub fn with_witness(mut self, details: Value) -> Self {
        self.witness["details"] = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

impl fmt::Display for Certification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.region_id.is_empty() {
            write!(f, "{} {}", self.verdict, self.name)
        } else {
            write!(f, "{} {} [{}]", self.verdict, self.name, self.region_id)
        }
    }
}
