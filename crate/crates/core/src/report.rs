//! Machine-readable witness certificates.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The finite claim holds and the evidence is exact and complete.
    Certified,
    /// A counterexample to the finite claim was found.
    Refuted,
    /// Bounded search ended without settling the claim.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

pub type Evidence = BTreeMap<String, String>;

/// All numbers are carried as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessReport {
    pub claim: String,
    pub parameters: BTreeMap<String, String>,
    pub evidence: Vec<Evidence>,
    pub verdict: Verdict,
    pub bounds: BTreeMap<String, String>,
}

impl WitnessReport {
    pub fn new(claim: impl Into<String>, verdict: Verdict) -> Self {
        WitnessReport {
            claim: claim.into(),
            parameters: BTreeMap::new(),
            evidence: Vec::new(),
            verdict,
            bounds: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn bound(mut self, key: &str, value: impl ToString) -> Self {
        self.bounds.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, item: &[(&str, String)]) {
        self.evidence.push(
            item.iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        );
    }

    /// Pretty JSON with lexicographically sorted keys.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serializable");
        serde_json::to_string_pretty(&value).expect("value is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            field: "report".into(),
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_sorted_keys() {
        let mut r = WitnessReport::new("demo", Verdict::Inconclusive)
            .param("z", 1)
            .param("a", "3/2")
            .bound("N", 1000);
        r.push(&[("n", "3".into()), ("m", "2".into())]);
        let text = r.to_json();
        assert!(text.find("\"bounds\"").unwrap() < text.find("\"claim\"").unwrap());
        assert!(text.find("\"a\"").unwrap() < text.find("\"z\"").unwrap());
        assert!(text.contains("\"inconclusive\""));
        assert_eq!(WitnessReport::from_json(&text).unwrap(), r);
    }
}
