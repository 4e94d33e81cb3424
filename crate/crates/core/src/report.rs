//! Per-sample pass/fail bookkeeping shared by every comparison check.

use serde::Serialize;

/// One checked inequality `lhs ≤ rhs`; `margin = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSample {
    pub label: String,
    pub at: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
}

/// Signed margins for a theorem-verification run.
///
/// Hypothesis samples are kept apart from claim samples, so a violated
/// precondition is never reported as a failure of the theorem itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub name: String,
    pub tolerance: f64,
    pub samples: Vec<ComparisonSample>,
    pub hypotheses: Vec<ComparisonSample>,
}

impl ComparisonReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            samples: Vec::new(),
            hypotheses: Vec::new(),
        }
    }

    fn sample(&self, label: &str, at: &[f64], lhs: f64, rhs: f64) -> ComparisonSample {
        let margin = rhs - lhs;
        ComparisonSample {
            label: label.to_string(),
            at: at.to_vec(),
            lhs,
            rhs,
            margin,
            passed: margin >= -self.tolerance,
        }
    }

    /// Records the claim `lhs ≤ rhs`.
    pub fn check_le(&mut self, label: &str, at: &[f64], lhs: f64, rhs: f64) {
        let s = self.sample(label, at, lhs, rhs);
        self.samples.push(s);
    }

    /// Records the hypothesis `lhs ≤ rhs`.
    pub fn require_le(&mut self, label: &str, at: &[f64], lhs: f64, rhs: f64) {
        let s = self.sample(label, at, lhs, rhs);
        self.hypotheses.push(s);
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|s| s.passed)
    }

    pub fn claims_hold(&self) -> bool {
        self.samples.iter().all(|s| s.passed)
    }

    /// True when every hypothesis and every claim holds.
    pub fn passed(&self) -> bool {
        self.hypotheses_hold() && self.claims_hold()
    }

    pub fn min_margin(&self) -> f64 {
        self.samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ComparisonSample> {
        self.samples.iter().filter(|s| !s.passed)
    }

    pub fn merge(&mut self, other: ComparisonReport) {
        self.samples.extend(other.samples);
        self.hypotheses.extend(other.hypotheses);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_tolerance() {
        let mut r = ComparisonReport::new("demo", 1e-6);
        r.check_le("a", &[0.0], 1.0, 2.0);
        r.check_le("b", &[1.0], 1.0 + 1e-7, 1.0);
        assert!(r.passed());
        assert!((r.min_margin() + 1e-7).abs() < 1e-15);
        r.check_le("c", &[2.0], 1.0, 0.0);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn hypothesis_failure_is_separate() {
        let mut r = ComparisonReport::new("demo", 0.0);
        r.require_le("init", &[], 2.0, 1.0);
        r.check_le("claim", &[], 0.0, 1.0);
        assert!(r.claims_hold());
        assert!(!r.hypotheses_hold());
        assert!(!r.passed());
    }
}
