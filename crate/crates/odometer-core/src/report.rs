//! Structured verdicts with exact values and enclosures.
//!
//! Every number in a record is serialized exactly as `num/den`; floating
//! point never appears in verdict-bearing fields. Records serialize to
//! single-line JSON with sorted keys, so identical runs produce
//! byte-identical report streams regardless of parallelism.

use crate::measure::RatInterval;
use num::BigRational;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Refuted,
    Inconclusive,
    HypothesesNotMet,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
            Verdict::HypothesesNotMet => "hypotheses-not-met",
        }
    }
}

/// A verdict for one claim, with the exact comparisons that justified it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub verdict: Verdict,
    pub params: BTreeMap<String, String>,
    pub values: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl ClaimReport {
    pub fn new(claim: impl Into<String>, verdict: Verdict) -> Self {
        ClaimReport {
            claim: claim.into(),
            verdict,
            params: BTreeMap::new(),
            values: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn value_rat(mut self, key: &str, value: &BigRational) -> Self {
        self.values.insert(key.to_string(), rat_str(value));
        self
    }

    pub fn value_interval(mut self, key: &str, value: &RatInterval) -> Self {
        self.values.insert(key.to_string(), value.to_record_string());
        self
    }

    pub fn value_str(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// One newline-terminated record. Deterministic: keys are sorted and no
    /// timing data is included.
    pub fn to_record(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Exact `num/den` rendering of a rational.
pub fn rat_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn record_is_single_line_with_exact_rationals() {
        let rep = ClaimReport::new("claim1", Verdict::Verified)
            .param("k", 1)
            .value_rat("count", &rat(8128, 1));
        let rec = rep.to_record();
        assert!(rec.ends_with('\n'));
        assert_eq!(rec.matches('\n').count(), 1);
        assert!(rec.contains("8128/1"));
        assert!(rec.contains("verified"));
    }
}
